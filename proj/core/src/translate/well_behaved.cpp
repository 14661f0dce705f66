#include "bpi/translate/translate.hpp"

namespace bpi::translate {

using namespace epi;

namespace {

// Ω: outputs and replies; Λ: handles and functions; Θ: numbers or handles.
enum class Sort { Out, Lam, Sig, Coll, Ctr, Theta };

using Env = std::map<std::string, Sort>;

std::optional<Sort> name_sort(const std::string& name) {
    auto r = role_of(name);
    if (!r) return std::nullopt;
    switch (*r) {
        case Role::Output:
        case Role::ReplyR: return Sort::Out;
        case Role::Handle:
        case Role::Function: return Sort::Lam;
        case Role::Signal: return Sort::Sig;
        case Role::Collection: return Sort::Coll;
        case Role::Counter: return Sort::Ctr;
    }
    return std::nullopt;
}

std::optional<Sort> term_sort(const Term& t, const Env& env) {
    if (t.is<TNum>()) return Sort::Theta;
    if (const auto* n = t.as<TName>()) return name_sort(n->id);
    if (const auto* x = t.as<TVar>()) {
        auto it = env.find(x->id);
        return it == env.end() ? Sort::Theta : it->second;
    }
    const auto& b = *t.as<TBin>();
    auto l = term_sort(b.lhs, env);
    auto r = term_sort(b.rhs, env);
    if (l == Sort::Theta && r == Sort::Theta) return Sort::Theta;
    return std::nullopt;
}

bool is_value(std::optional<Sort> s) { return s == Sort::Theta || s == Sort::Lam; }

class Checker {
   public:
    std::string failure;

    bool check(const Process& p, const Env& env) {
        if (p.is<Nil>()) return true;
        if (const auto* x = p.as<Par>()) return check(x->left, env) && check(x->right, env);
        if (const auto* x = p.as<Bullet>()) return check(x->body, env);
        if (const auto* x = p.as<Repl>()) {
            Process body = x->body;
            while (const auto* b = body.as<Bullet>()) body = b->body;
            if (!body.is<Act>()) return fail(p, "replication must guard an action");
            return check(body, env);
        }
        if (const auto* x = p.as<New>()) {
            if (!name_sort(x->name)) return fail(p, "restricted name '" + x->name + "' has no channel role");
            return check(x->body, env);
        }
        if (const auto* x = p.as<Match>()) {
            if (!is_value(term_sort(x->lhs, env)) || !is_value(term_sort(x->rhs, env)))
                return fail(p, "comparison operands must be numbers or handles");
            return check(x->then_p, env) && check(x->else_p, env);
        }
        const auto& a = *p.as<Act>();
        Env inner = env;
        if (!action(a.action, env, inner, p)) return false;
        return check(a.cont, inner);
    }

   private:
    bool fail(const Process& at, const std::string& why) {
        std::string text = pretty(at);
        if (text.size() > 80) text = text.substr(0, 77) + "...";
        failure = why + " at: " + text;
        return false;
    }

    bool values(const std::vector<Term>& ts, const Env& env) {
        for (const auto& t : ts)
            if (!is_value(term_sort(t, env))) return false;
        return true;
    }

    void bind(const std::vector<Pattern>& ps, const std::vector<Sort>& sorts, Env& env) {
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (ps[i]) env[*ps[i]] = sorts[i];
    }

    bool action(const Action& a, const Env& env, Env& inner, const Process& at) {
        using K = Action::Kind;
        auto base = term_sort(a.channel.base, env);
        if (!base) return fail(at, "channel has no role");
        const bool send = a.kind == K::Send;
        const bool recv = a.kind == K::Recv;
        const std::size_t n = a.arity();
        auto expect = [&](std::size_t arity, std::vector<Sort> sorts) {
            if (n != arity) return fail(at, "wrong arity");
            if (send) {
                for (std::size_t i = 0; i < n; ++i) {
                    auto s = term_sort(a.args[i], env);
                    if (sorts[i] == Sort::Theta ? !is_value(s) : s != sorts[i])
                        return fail(at, "argument " + std::to_string(i + 1) + " has the wrong sort");
                }
            } else if (recv) {
                bind(a.params, sorts, inner);
            }
            return true;
        };
        if (!a.channel.suffix) {
            if (a.kind == K::Broadcast) return fail(at, "broadcast only on h.all");
            switch (*base) {
                case Sort::Out: return expect(1, {Sort::Theta});
                case Sort::Lam:
                case Sort::Theta: return expect(2, {Sort::Theta, Sort::Out});
                case Sort::Coll: return expect(2, {Sort::Theta, Sort::Theta});
                case Sort::Sig: return expect(0, {});
                case Sort::Ctr: return expect(1, {Sort::Theta});
            }
        }
        if (!is_value(base)) return fail(at, "composite channel needs a handle base");
        switch (a.channel.suffix->kind) {
            case Label::Kind::Index:
                if (!is_value(term_sort(a.channel.suffix->index, env))) return fail(at, "index label is not a number");
                if (a.kind == K::Broadcast) return fail(at, "broadcast only on h.all");
                return expect(2, {Sort::Theta, Sort::Theta});
            case Label::Kind::Len:
                if (a.kind == K::Broadcast) return fail(at, "broadcast only on h.all");
                return expect(1, {Sort::Theta});
            case Label::Kind::Tup:
                if (a.kind == K::Broadcast) return fail(at, "broadcast only on h.all");
                if (send && !values(a.args, env)) return fail(at, "tuple components must be values");
                if (recv) bind(a.params, std::vector<Sort>(n, Sort::Theta), inner);
                return true;
            case Label::Kind::All:
                if (send) return fail(at, "h.all is broadcast-only");
                if (n != 1) return fail(at, "wrong arity");
                if (recv) {
                    bind(a.params, {Sort::Coll}, inner);
                    return true;
                }
                if (term_sort(a.args[0], env) != Sort::Coll) return fail(at, "h.all carries a collection");
                return true;
        }
        return fail(at, "unknown channel");
    }
};

}  // namespace

WellBehaved well_behaved(const Process& p) {
    Checker c;
    if (c.check(p, {})) return {};
    return WellBehaved{false, c.failure};
}

WellBehaved well_behaved(const Config& c) { return well_behaved(to_process(c)); }

}  // namespace bpi::translate
