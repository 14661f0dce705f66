#pragma once

// Compositional translation of BUTF expressions into Eπ processes, plus the
// well-behavedness check for translated processes.

#include "bpi/butf/expr.hpp"
#include "bpi/epi/engine.hpp"
#include "bpi/epi/process.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>

namespace bpi::translate {

/// Every fresh name carries one role, visible in its prefix.
enum class Role { Output, Handle, Signal, Collection, Function, ReplyR, Counter };

std::string_view role_prefix(Role r);

/// Role of a translator or runtime name (`o`, `h3`, `vals2#17`, ...).
std::optional<Role> role_of(std::string_view name);

struct TranslationOptions {
    /// size and iota carry a bullet at their committing step.
    bool strict_bullets = true;
    /// Repeat uses the `[n >= 0]` guard and emits pairs in parallel.
    bool parallel_repeat = false;
};

/// `-- translation: strict_bullets=on parallel_repeat=off`
std::string options_header(const TranslationOptions& opts);

/// Draws names and binder variables that avoid a fixed identifier set.
class FreshNames {
   public:
    explicit FreshNames(std::set<std::string> avoid = {}) : avoid_(std::move(avoid)) {}
    std::string name(Role r) { return next(std::string(role_prefix(r))); }
    std::string var(const std::string& prefix) { return next(prefix); }

   private:
    std::string next(const std::string& prefix);
    std::set<std::string> avoid_;
    std::map<std::string, unsigned> counters_;
};

/// ⟦e⟧_out. Free BUTF variables become free Eπ variables.
epi::Process translate(const butf::Expr& e, const std::string& out = "o", const TranslationOptions& opts = {});

/// !h·all(r).r̄⟨i,v⟩ | !h·i⟨i,v⟩
epi::Process cell(const epi::Term& h, const epi::Term& i, const epi::Term& v, const std::string& reply_var = "r");

/// Emits (s−1, s−1), …, (0, 0) on r, then d̄⟨⟩.
epi::Process repeat(const epi::Term& s, const epi::Term& r, const epi::Term& d, const TranslationOptions& opts = {},
                    const std::string& counter = "c", const std::string& var = "n");

/// Body of a builtin applied to the value bound to `arg`, answering on `out`.
epi::Process builtin_body(const butf::Builtin& b, const epi::Term& arg, const epi::Term& out, bool bulleted,
                          FreshNames& fresh, const TranslationOptions& opts);

/// Number of bullets translate() places for `e`.
std::size_t expected_bullets(const butf::Expr& e, const TranslationOptions& opts);

struct WellBehaved {
    bool ok = true;
    std::string path;  // location of the first violation
    explicit operator bool() const { return ok; }
};

/// Membership in the grammar of translated building blocks, up to flattening.
WellBehaved well_behaved(const epi::Process& p);
WellBehaved well_behaved(const epi::Config& c);

}  // namespace bpi::translate
