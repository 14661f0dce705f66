#pragma once

// Shared test helpers: the golden corpus, random program generators and an
// α-equivalence check for processes.

#include "bpi/butf/eval.hpp"
#include "bpi/butf/syntax.hpp"
#include "bpi/epi/process.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef BPI_CORPUS_DIR
#error "BPI_CORPUS_DIR must point at the corpus directory"
#endif

namespace bpi::testing {

struct CorpusProgram {
    std::string name;
    std::string source;
    butf::Expr expr;
    bool expect_stuck = false;
    std::optional<butf::Expr> expected;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Every corpus file starts with a `-- expect: <value>` or `-- expect: stuck`
// line (possibly after other comment lines).
inline std::vector<CorpusProgram> load_corpus() {
    std::vector<CorpusProgram> out;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(BPI_CORPUS_DIR))
        if (entry.path().extension() == ".butf") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        CorpusProgram p;
        p.name = f.stem().string();
        p.source = read_file(f);
        p.expr = butf::parse(p.source);
        std::istringstream lines(p.source);
        for (std::string line; std::getline(lines, line);) {
            const std::string tag = "-- expect: ";
            if (line.rfind(tag, 0) != 0) continue;
            const std::string want = line.substr(tag.size());
            if (want == "stuck")
                p.expect_stuck = true;
            else
                p.expected = butf::parse(want);
            break;
        }
        out.push_back(std::move(p));
    }
    return out;
}

/// Closed BUTF programs built from a small type discipline so that most of
/// them terminate with a first-order value. `ill_typed` mixes in shapes that
/// get stuck.
class ProgramGen {
   public:
    explicit ProgramGen(std::uint64_t seed, bool ill_typed = false) : rng_(seed), ill_typed_(ill_typed) {}

    butf::Expr program(int depth = 3) {
        switch (pick(5)) {
            case 0: return arr(depth, {});
            case 1: return butf::tuple({num(depth - 1, {}), arr(depth - 1, {})});
            case 2: return fun(depth, {});
            default: return num(depth, {});
        }
    }

    /// Arbitrary closed expression of the requested size, ignoring types.
    butf::Expr wild(int depth, std::vector<std::string> scope = {}) {
        using namespace butf;
        if (depth <= 0 || pick(4) == 0) {
            if (!scope.empty() && pick(2)) return var(scope[pick(scope.size())]);
            switch (pick(5)) {
                case 0: return builtin(BuiltinKind::Map);
                case 1: return builtin(BuiltinKind::Size);
                case 2: return builtin(BuiltinKind::Iota);
                case 3: return arith(static_cast<ArithOp>(pick(4)));
                default: return butf::num(Integer(static_cast<long>(pick(7)) - 2));
            }
        }
        switch (pick(7)) {
            case 0: {
                auto x = fresh();
                scope.push_back(x);
                return lambda(x, wild(depth - 1, scope));
            }
            case 1: return app(wild(depth - 1, scope), wild(depth - 1, scope));
            case 2: return index(wild(depth - 1, scope), wild(depth - 1, scope));
            case 3: return if_(wild(depth - 1, scope), wild(depth - 1, scope), wild(depth - 1, scope));
            case 4: return array(many(depth, scope));
            case 5: return tuple(many(depth, scope));
            default: return binop(static_cast<ArithOp>(pick(3)), wild(depth - 1, scope), wild(depth - 1, scope));
        }
    }

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

   private:
    using Scope = std::vector<std::string>;  // variables of number type

    std::vector<butf::Expr> many(int depth, const Scope& scope) {
        std::vector<butf::Expr> xs;
        for (std::size_t i = 0, n = pick(4); i < n; ++i) xs.push_back(wild(depth - 1, scope));
        return xs;
    }

    std::string fresh() {
        // reuse a small pool now and then so shadowing shows up
        if (pick(4) == 0) return "y";
        return "x" + std::to_string(counter_++);
    }

    butf::Expr literal() { return butf::num(Integer(static_cast<long>(pick(6)) - 1)); }

    butf::Expr num(int depth, Scope scope) {
        using namespace butf;
        if (depth <= 0 || pick(3) == 0) {
            if (!scope.empty() && pick(2)) return var(scope[pick(scope.size())]);
            return literal();
        }
        switch (pick(8)) {
            case 0: return binop(static_cast<ArithOp>(pick(3)), num(depth - 1, scope), num(depth - 1, scope));
            case 1: return binop(ArithOp::Div, num(depth - 1, scope), butf::num(Integer(1 + pick(3))));
            case 2: {
                auto x = fresh();
                auto arg = num(depth - 1, scope);
                scope.push_back(x);
                return app(lambda(x, num(depth - 1, scope)), arg);
            }
            case 3: return if_(num(depth - 1, scope), num(depth - 1, scope), num(depth - 1, scope));
            case 4: return index(arr(depth - 1, scope), ill_typed_ ? literal() : butf::num(0));
            case 5: return app(builtin(BuiltinKind::Size), arr(depth - 1, scope));
            case 6: return app(fun(depth - 1, scope), num(depth - 1, scope));
            default:
                if (ill_typed_) return app(num(depth - 1, scope), num(depth - 1, scope));
                return num(depth - 1, scope);
        }
    }

    // Arrays are never empty when indexed at 0 unless `ill_typed_`.
    butf::Expr arr(int depth, const Scope& scope) {
        using namespace butf;
        if (depth <= 0) return array({literal()});
        switch (pick(4)) {
            case 0: {
                std::vector<Expr> xs;
                for (std::size_t i = 0, n = 1 + pick(3); i < n; ++i) xs.push_back(num(depth - 1, scope));
                return array(std::move(xs));
            }
            case 1: return app(builtin(BuiltinKind::Iota), butf::num(Integer(ill_typed_ ? pick(3) : 1 + pick(2))));
            case 2: {
                auto x = fresh();
                Scope inner = scope;
                inner.push_back(x);
                return app(builtin(BuiltinKind::Map), tuple({lambda(x, num(depth - 1, inner)), arr(depth - 1, scope)}));
            }
            default:
                if (ill_typed_) return array({});
                return array({num(depth - 1, scope), num(depth - 1, scope)});
        }
    }

    butf::Expr fun(int depth, Scope scope) {
        auto x = fresh();
        scope.push_back(x);
        return butf::lambda(x, num(depth - 1, scope));
    }

    std::mt19937_64 rng_;
    bool ill_typed_;
    unsigned counter_ = 0;
};

namespace detail {

struct AlphaEnv {
    std::map<std::string, std::string> names_l, names_r;
    std::map<std::string, std::string> vars_l, vars_r;
};

inline bool same_id(const std::map<std::string, std::string>& l, const std::map<std::string, std::string>& r,
                    const std::string& a, const std::string& b) {
    auto la = l.find(a);
    auto rb = r.find(b);
    if (la == l.end() && rb == r.end()) return a == b;
    return la != l.end() && rb != r.end() && la->second == b && rb->second == a;
}

inline bool alpha_term(const epi::Term& a, const epi::Term& b, const AlphaEnv& env) {
    if (const auto* x = a.as<epi::TNum>()) return b.is<epi::TNum>() && b.as<epi::TNum>()->value == x->value;
    if (const auto* x = a.as<epi::TName>())
        return b.is<epi::TName>() && same_id(env.names_l, env.names_r, x->id, b.as<epi::TName>()->id);
    if (const auto* x = a.as<epi::TVar>())
        return b.is<epi::TVar>() && same_id(env.vars_l, env.vars_r, x->id, b.as<epi::TVar>()->id);
    const auto& x = *a.as<epi::TBin>();
    const auto* y = b.as<epi::TBin>();
    return y && x.op == y->op && alpha_term(x.lhs, y->lhs, env) && alpha_term(x.rhs, y->rhs, env);
}

inline bool alpha_channel(const epi::ChannelId& a, const epi::ChannelId& b, const AlphaEnv& env) {
    if (!alpha_term(a.base, b.base, env) || a.suffix.has_value() != b.suffix.has_value()) return false;
    if (!a.suffix) return true;
    if (a.suffix->kind != b.suffix->kind) return false;
    return a.suffix->kind != epi::Label::Kind::Index || alpha_term(a.suffix->index, b.suffix->index, env);
}

inline bool alpha_proc(const epi::Process& a, const epi::Process& b, AlphaEnv env) {
    using namespace epi;
    if (a->v.index() != b->v.index()) return false;
    if (a.is<Nil>()) return true;
    if (const auto* x = a.as<Par>()) {
        const auto* y = b.as<Par>();
        return alpha_proc(x->left, y->left, env) && alpha_proc(x->right, y->right, env);
    }
    if (const auto* x = a.as<Repl>()) return alpha_proc(x->body, b.as<Repl>()->body, env);
    if (const auto* x = a.as<Bullet>()) return alpha_proc(x->body, b.as<Bullet>()->body, env);
    if (const auto* x = a.as<New>()) {
        const auto* y = b.as<New>();
        env.names_l[x->name] = y->name;
        env.names_r[y->name] = x->name;
        return alpha_proc(x->body, y->body, env);
    }
    if (const auto* x = a.as<Match>()) {
        const auto* y = b.as<Match>();
        return x->cmp == y->cmp && alpha_term(x->lhs, y->lhs, env) && alpha_term(x->rhs, y->rhs, env) &&
               alpha_proc(x->then_p, y->then_p, env) && alpha_proc(x->else_p, y->else_p, env);
    }
    const auto& x = *a.as<Act>();
    const auto& y = *b.as<Act>();
    const Action& p = x.action;
    const Action& q = y.action;
    if (p.kind != q.kind || p.arity() != q.arity() || !alpha_channel(p.channel, q.channel, env)) return false;
    if (p.kind != Action::Kind::Recv) {
        for (std::size_t i = 0; i < p.args.size(); ++i)
            if (!alpha_term(p.args[i], q.args[i], env)) return false;
        return alpha_proc(x.cont, y.cont, env);
    }
    for (std::size_t i = 0; i < p.params.size(); ++i) {
        if (p.params[i].has_value() != q.params[i].has_value()) return false;
        if (!p.params[i]) continue;
        env.vars_l[*p.params[i]] = *q.params[i];
        env.vars_r[*q.params[i]] = *p.params[i];
    }
    return alpha_proc(x.cont, y.cont, env);
}

}  // namespace detail

/// Equality up to consistent renaming of bound names and variables.
inline bool alpha_equal(const epi::Process& a, const epi::Process& b) { return detail::alpha_proc(a, b, {}); }

}  // namespace bpi::testing
