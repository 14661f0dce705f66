#pragma once

// Reduction engine: flattened configurations, redex enumeration (including
// atomic broadcast), labelled steps, schedulers, barbs and state exploration.

#include "bpi/epi/process.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpi::epi {

/// A sequential component of a configuration. The head is an `Act` or a
/// `Match`; `replicated` marks a folded `!head`. `bullets` counts the `*`
/// prefixes wrapping the head.
struct Thread {
    std::uint64_t id = 0;
    Process head;
    bool replicated = false;
    unsigned bullets = 0;
    std::uint64_t depth = 0;
};

struct Config {
    std::set<std::string> restricted;
    std::vector<Thread> threads;
    std::uint64_t next_name = 0;
    std::uint64_t next_thread = 0;
};

class NormalizeError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Flattens a closed process into threads, extruding every restriction to
/// the top with a fresh runtime name `base#k`.
Config normalize(const Process& p);

/// Adds the threads of `p` to `c` at the given depth. Returns the number of
/// bullets dropped because they guarded `0`.
std::size_t spawn(Config& c, const Process& p, std::uint64_t depth, unsigned bullets = 0);

/// Rebuilds a process term from a configuration.
Process to_process(const Config& c);

enum class RedexKind { Comm, Broad, Then, Else };
std::string_view redex_rule_name(RedexKind k);

struct Redex {
    RedexKind kind = RedexKind::Comm;
    std::size_t initiator = 0;               // index into Config::threads
    std::vector<std::size_t> receivers;      // indices; COMM has exactly one
    std::string channel;                     // empty for THEN/ELSE
};

struct Enabled {
    std::vector<Redex> redexes;
    std::vector<std::string> diagnostics;    // arity mismatches
};

struct EngineOptions {
    bool strict = true;        // arity mismatch and runtime faults abort
    bool admin_only = false;   // enumerate administrative redexes only
};

Enabled enabled_redexes(const Config& c, const EngineOptions& opts = {});

/// True when firing `r` consumes a bullet.
bool is_important(const Config& c, const Redex& r);

struct Step {
    enum class Kind { Important, Administrative };
    Kind kind = Kind::Administrative;
    RedexKind rule = RedexKind::Comm;
    std::string channel;           // channel key; empty for THEN/ELSE
    std::string label;             // ":c" for a broadcast on a free channel, else empty
    std::vector<std::uint64_t> participants;  // thread ids
    std::uint64_t depth_after = 0;
    // Bullet bookkeeping: after = before + unfolded - consumed - discarded.
    std::size_t bullets_consumed = 0;
    std::size_t bullets_unfolded = 0;   // copies of replicated threads
    std::size_t bullets_discarded = 0;  // untaken branches, bulleted 0
};

class RuntimeFault : public std::runtime_error {
   public:
    RuntimeFault(std::uint64_t thread, const std::string& what)
        : std::runtime_error(what), thread_(thread) {}
    std::uint64_t thread() const { return thread_; }

   private:
    std::uint64_t thread_;
};

/// Fires `r`. Throws RuntimeFault when a transmitted or compared term cannot
/// be evaluated.
std::pair<Config, Step> apply_redex(const Config& c, const Redex& r);

/// Total bullets over all threads (replicated threads count once).
std::size_t config_bullets(const Config& c);

struct Barb {
    std::string channel;
    bool out = false;
    friend auto operator<=>(const Barb&, const Barb&) = default;
};
std::set<Barb> barbs(const Config& c);
bool has_barb(const Config& c, const std::string& channel, bool out);

/// Drops replicated threads whose subject is a restricted name that only
/// other such threads mention.
Config garbage_collect(const Config& c);

/// A structural key invariant under renaming of restricted names; thread
/// ids, depths and counters are ignored.
std::string canonical_key(const Config& c);

std::string pretty(const Config& c);

enum class SchedulerKind { SeededRandom, PriorityDeterministic };

struct SchedulerPolicy {
    SchedulerKind kind = SchedulerKind::PriorityDeterministic;
    std::uint64_t seed = 0;

    static SchedulerPolicy random(std::uint64_t seed) { return {SchedulerKind::SeededRandom, seed}; }
    static SchedulerPolicy priority() { return {SchedulerKind::PriorityDeterministic, 0}; }
};

struct RunOptions {
    std::uint64_t budget = 1'000'000;
    EngineOptions engine;
    bool gc = false;
    std::optional<std::string> stop_barb;  // stop once this channel shows an out-barb
    std::function<void(const Config&, const Step*)> observer;  // initial config with nullptr, then each step
};

struct Fault {
    std::uint64_t thread;
    std::string message;
};

struct Trace {
    enum class Status { Quiescent, StopBarb, Timeout, Faulted };
    Status status = Status::Quiescent;
    std::vector<Step> steps;
    Config final;
    std::uint64_t work = 0;
    std::uint64_t span = 0;
    std::uint64_t admin_steps = 0;
    std::vector<Fault> faults;
    std::vector<std::string> diagnostics;
    std::set<Barb> final_barbs;
};

std::string_view status_name(Trace::Status s);

Trace run(const Config& c, const SchedulerPolicy& policy, const RunOptions& opts = {});

struct ExploreOptions {
    std::size_t state_bound = 100'000;
    std::size_t depth_bound = SIZE_MAX;
    EngineOptions engine;
    bool gc = false;
    /// Expand a single redex whenever one is provably independent of every
    /// other present or future transition (preserves terminal states).
    bool reduce = true;
    std::function<bool(const Config&)> stop;  // treat matching states as terminal
};

struct ExploreResult {
    std::vector<Config> terminals;
    bool bound_hit = false;
    std::size_t states = 0;
    std::size_t faults = 0;  // transitions that faulted (not followed)
};

ExploreResult explore(const Config& c, const ExploreOptions& opts = {});

/// True when no other thread, now or after any sequence of other steps, can
/// compete for the participants of `r` on its channel.
bool is_persistent(const Config& c, const Redex& r);

}  // namespace bpi::epi
