#include "bpi/epi/process.hpp"

#include "bpi/butf/eval.hpp"

namespace bpi::epi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

template <typename T>
Term make_term(T t) {
    return Term(std::make_shared<const TermNode>(TermNode{std::move(t)}));
}

template <typename T>
Process make_proc(T t) {
    return Process(std::make_shared<const ProcNode>(ProcNode{std::move(t)}));
}

bool same(const Term& a, const Term& b) { return &a.node() == &b.node(); }
bool same(const Process& a, const Process& b) { return &a.node() == &b.node(); }

const Process& shared_nil() {
    static const Process p = make_proc(Nil{});
    return p;
}

}  // namespace

Term::Term() : node_(std::make_shared<const TermNode>(TermNode{TNum{0}})) {}

bool operator==(const Term& a, const Term& b) {
    if (same(a, b)) return true;
    if (a->v.index() != b->v.index()) return false;
    return std::visit(overloaded{
                          [&](const TNum& x) { return x.value == b.as<TNum>()->value; },
                          [&](const TName& x) { return x.id == b.as<TName>()->id; },
                          [&](const TVar& x) { return x.id == b.as<TVar>()->id; },
                          [&](const TBin& x) {
                              const auto* y = b.as<TBin>();
                              return x.op == y->op && x.lhs == y->lhs && x.rhs == y->rhs;
                          },
                      },
                      a->v);
}

Term tnum(Integer n) { return make_term(TNum{std::move(n)}); }
Term tname(std::string id) { return make_term(TName{std::move(id)}); }
Term tvar(std::string id) { return make_term(TVar{std::move(id)}); }
Term tbin(ArithOp op, Term lhs, Term rhs) { return make_term(TBin{op, std::move(lhs), std::move(rhs)}); }

Term eval_term(const Term& t) {
    return std::visit(overloaded{
                          [&](const TNum&) { return t; },
                          [&](const TName&) { return t; },
                          [&](const TVar& x) -> Term { throw TermError("open variable '" + x.id + "'"); },
                          [&](const TBin& b) -> Term {
                              Term l = eval_term(b.lhs);
                              Term r = eval_term(b.rhs);
                              const auto* ln = l.as<TNum>();
                              const auto* rn = r.as<TNum>();
                              if (!ln || !rn) throw TermError("arithmetic on a name");
                              try {
                                  return tnum(butf::apply_arith(b.op, ln->value, rn->value));
                              } catch (const butf::ArithError& e) {
                                  throw TermError(e.what());
                              }
                          },
                      },
                      t->v);
}

ChannelId chan(Term base) { return ChannelId{std::move(base), std::nullopt}; }
ChannelId chan(Term base, Label::Kind kind) { return ChannelId{std::move(base), Label{kind, Term{}}}; }
ChannelId chan_index(Term base, Term index) {
    return ChannelId{std::move(base), Label{Label::Kind::Index, std::move(index)}};
}

std::optional<std::string> channel_key(const ChannelId& c) {
    const auto* base = c.base.as<TName>();
    if (!base) return std::nullopt;
    if (!c.suffix) return base->id;
    switch (c.suffix->kind) {
        case Label::Kind::All: return base->id + ".all";
        case Label::Kind::Tup: return base->id + ".tup";
        case Label::Kind::Len: return base->id + ".len";
        case Label::Kind::Index: {
            const TNum* n = c.suffix->index.as<TNum>();
            Term folded;
            if (!n && c.suffix->index.is<TBin>()) {
                try {
                    folded = eval_term(c.suffix->index);
                    n = folded.as<TNum>();
                } catch (const TermError&) {
                    return std::nullopt;
                }
            }
            if (!n) return std::nullopt;
            return base->id + "." + n->value.str();
        }
    }
    return std::nullopt;
}

std::string_view cmp_symbol(Cmp c) {
    switch (c) {
        case Cmp::Lt: return "<";
        case Cmp::Gt: return ">";
        case Cmp::Le: return "<=";
        case Cmp::Ge: return ">=";
        case Cmp::Eq: return "=";
        case Cmp::Ne: return "!=";
    }
    return "?";
}

Process::Process() : node_(shared_nil().node_) {}

bool operator==(const Process& a, const Process& b) {
    if (same(a, b)) return true;
    if (a->v.index() != b->v.index()) return false;
    return std::visit(overloaded{
                          [&](const Nil&) { return true; },
                          [&](const Par& x) {
                              const auto* y = b.as<Par>();
                              return x.left == y->left && x.right == y->right;
                          },
                          [&](const Repl& x) { return x.body == b.as<Repl>()->body; },
                          [&](const New& x) {
                              const auto* y = b.as<New>();
                              return x.name == y->name && x.body == y->body;
                          },
                          [&](const Act& x) {
                              const auto* y = b.as<Act>();
                              return x.action == y->action && x.cont == y->cont;
                          },
                          [&](const Bullet& x) { return x.body == b.as<Bullet>()->body; },
                          [&](const Match& x) {
                              const auto* y = b.as<Match>();
                              return x.lhs == y->lhs && x.cmp == y->cmp && x.rhs == y->rhs && x.then_p == y->then_p &&
                                     x.else_p == y->else_p;
                          },
                      },
                      a->v);
}

Process nil() { return shared_nil(); }
Process par(Process l, Process r) { return make_proc(Par{std::move(l), std::move(r)}); }
Process par_all(std::vector<Process> parts) {
    if (parts.empty()) return nil();
    Process acc = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) acc = par(std::move(acc), std::move(parts[i]));
    return acc;
}
Process repl(Process body) { return make_proc(Repl{std::move(body)}); }
Process new_(std::string name, Process body) { return make_proc(New{std::move(name), std::move(body)}); }
Process new_all(const std::vector<std::string>& names, Process body) {
    for (auto it = names.rbegin(); it != names.rend(); ++it) body = new_(*it, std::move(body));
    return body;
}
Process act(Action a, Process cont) { return make_proc(Act{std::move(a), std::move(cont)}); }
Process bullet(Process body) { return make_proc(Bullet{std::move(body)}); }
Process match(Term lhs, Cmp cmp, Term rhs, Process then_p, Process else_p) {
    return make_proc(Match{std::move(lhs), cmp, std::move(rhs), std::move(then_p), std::move(else_p)});
}

Action send(ChannelId c, std::vector<Term> args) { return Action{Action::Kind::Send, std::move(c), std::move(args), {}}; }
Action recv(ChannelId c, std::vector<Pattern> params) {
    return Action{Action::Kind::Recv, std::move(c), {}, std::move(params)};
}
Action broadcast(ChannelId c, std::vector<Term> args) {
    return Action{Action::Kind::Broadcast, std::move(c), std::move(args), {}};
}

Term subst_term(const Term& t, const Substitution& s) {
    return std::visit(overloaded{
                          [&](const TNum&) { return t; },
                          [&](const TName& n) {
                              auto it = s.names.find(n.id);
                              return it == s.names.end() ? t : tname(it->second);
                          },
                          [&](const TVar& x) {
                              auto it = s.vars.find(x.id);
                              return it == s.vars.end() ? t : it->second;
                          },
                          [&](const TBin& b) {
                              Term l = subst_term(b.lhs, s);
                              Term r = subst_term(b.rhs, s);
                              if (same(l, b.lhs) && same(r, b.rhs)) return t;
                              return tbin(b.op, std::move(l), std::move(r));
                          },
                      },
                      t->v);
}

ChannelId subst_channel(const ChannelId& c, const Substitution& s) {
    ChannelId out{subst_term(c.base, s), c.suffix};
    if (out.suffix && out.suffix->kind == Label::Kind::Index) out.suffix->index = subst_term(out.suffix->index, s);
    return out;
}

namespace {

Action subst_action(const Action& a, const Substitution& s) {
    Action out = a;
    out.channel = subst_channel(a.channel, s);
    for (auto& t : out.args) t = subst_term(t, s);
    return out;
}

void names_of_subst(const Substitution& s, std::set<std::string>& out) {
    for (const auto& [_, t] : s.vars) collect_term_names(t, out);
    for (const auto& [_, n] : s.names) out.insert(n);
}

}  // namespace

Process subst(const Process& p, const Substitution& s) {
    if (s.empty()) return p;
    return std::visit(
        overloaded{
            [&](const Nil&) { return p; },
            [&](const Par& x) {
                Process l = subst(x.left, s);
                Process r = subst(x.right, s);
                if (same(l, x.left) && same(r, x.right)) return p;
                return par(std::move(l), std::move(r));
            },
            [&](const Repl& x) {
                Process b = subst(x.body, s);
                return same(b, x.body) ? p : repl(std::move(b));
            },
            [&](const Bullet& x) {
                Process b = subst(x.body, s);
                return same(b, x.body) ? p : bullet(std::move(b));
            },
            [&](const New& x) -> Process {
                Substitution inner = s;
                inner.names.erase(x.name);
                std::set<std::string> incoming;
                names_of_subst(inner, incoming);
                if (!incoming.contains(x.name)) {
                    Process b = subst(x.body, inner);
                    return same(b, x.body) ? p : new_(x.name, std::move(b));
                }
                std::set<std::string> avoid = free_names(x.body);
                avoid.insert(incoming.begin(), incoming.end());
                std::string renamed;
                for (unsigned k = 1;; ++k) {
                    renamed = x.name + "~" + std::to_string(k);
                    if (!avoid.contains(renamed)) break;
                }
                inner.names[x.name] = renamed;
                return new_(renamed, subst(x.body, inner));
            },
            [&](const Act& x) {
                Action a = subst_action(x.action, s);
                Process cont;
                if (x.action.kind == Action::Kind::Recv) {
                    Substitution inner = s;
                    for (const auto& prm : x.action.params)
                        if (prm) inner.vars.erase(*prm);
                    cont = subst(x.cont, inner);
                } else {
                    cont = subst(x.cont, s);
                }
                return act(std::move(a), std::move(cont));
            },
            [&](const Match& x) {
                return match(subst_term(x.lhs, s), x.cmp, subst_term(x.rhs, s), subst(x.then_p, s),
                             subst(x.else_p, s));
            },
        },
        p->v);
}

void collect_term_names(const Term& t, std::set<std::string>& out) {
    std::visit(overloaded{
                   [](const TNum&) {},
                   [&](const TName& n) { out.insert(n.id); },
                   [](const TVar&) {},
                   [&](const TBin& b) {
                       collect_term_names(b.lhs, out);
                       collect_term_names(b.rhs, out);
                   },
               },
               t->v);
}

namespace {

void collect_term_vars(const Term& t, const std::set<std::string>& bound, std::set<std::string>& out) {
    std::visit(overloaded{
                   [](const TNum&) {},
                   [](const TName&) {},
                   [&](const TVar& x) {
                       if (!bound.contains(x.id)) out.insert(x.id);
                   },
                   [&](const TBin& b) {
                       collect_term_vars(b.lhs, bound, out);
                       collect_term_vars(b.rhs, bound, out);
                   },
               },
               t->v);
}

void channel_terms(const ChannelId& c, auto&& fn) {
    fn(c.base);
    if (c.suffix && c.suffix->kind == Label::Kind::Index) fn(c.suffix->index);
}

void fn_rec(const Process& p, std::set<std::string>& bound, std::set<std::string>& out) {
    auto term = [&](const Term& t) {
        std::set<std::string> ns;
        collect_term_names(t, ns);
        for (const auto& n : ns)
            if (!bound.contains(n)) out.insert(n);
    };
    std::visit(overloaded{
                   [](const Nil&) {},
                   [&](const Par& x) {
                       fn_rec(x.left, bound, out);
                       fn_rec(x.right, bound, out);
                   },
                   [&](const Repl& x) { fn_rec(x.body, bound, out); },
                   [&](const Bullet& x) { fn_rec(x.body, bound, out); },
                   [&](const New& x) {
                       const bool added = bound.insert(x.name).second;
                       fn_rec(x.body, bound, out);
                       if (added) bound.erase(x.name);
                   },
                   [&](const Act& x) {
                       channel_terms(x.action.channel, term);
                       for (const auto& t : x.action.args) term(t);
                       fn_rec(x.cont, bound, out);
                   },
                   [&](const Match& x) {
                       term(x.lhs);
                       term(x.rhs);
                       fn_rec(x.then_p, bound, out);
                       fn_rec(x.else_p, bound, out);
                   },
               },
               p->v);
}

void fv_rec(const Process& p, std::set<std::string>& bound, std::set<std::string>& out) {
    auto term = [&](const Term& t) { collect_term_vars(t, bound, out); };
    std::visit(overloaded{
                   [](const Nil&) {},
                   [&](const Par& x) {
                       fv_rec(x.left, bound, out);
                       fv_rec(x.right, bound, out);
                   },
                   [&](const Repl& x) { fv_rec(x.body, bound, out); },
                   [&](const Bullet& x) { fv_rec(x.body, bound, out); },
                   [&](const New& x) { fv_rec(x.body, bound, out); },
                   [&](const Act& x) {
                       channel_terms(x.action.channel, term);
                       for (const auto& t : x.action.args) term(t);
                       std::vector<std::string> added;
                       for (const auto& prm : x.action.params)
                           if (prm && bound.insert(*prm).second) added.push_back(*prm);
                       fv_rec(x.cont, bound, out);
                       for (const auto& a : added) bound.erase(a);
                   },
                   [&](const Match& x) {
                       term(x.lhs);
                       term(x.rhs);
                       fv_rec(x.then_p, bound, out);
                       fv_rec(x.else_p, bound, out);
                   },
               },
               p->v);
}

}  // namespace

std::set<std::string> free_names(const Process& p) {
    std::set<std::string> bound, out;
    fn_rec(p, bound, out);
    return out;
}

std::set<std::string> free_vars(const Process& p) {
    std::set<std::string> bound, out;
    fv_rec(p, bound, out);
    return out;
}

std::size_t count_bullets(const Process& p) {
    return std::visit(overloaded{
                          [](const Nil&) -> std::size_t { return 0; },
                          [](const Par& x) { return count_bullets(x.left) + count_bullets(x.right); },
                          [](const Repl& x) { return count_bullets(x.body); },
                          [](const New& x) { return count_bullets(x.body); },
                          [](const Act& x) { return count_bullets(x.cont); },
                          [](const Bullet& x) { return 1 + count_bullets(x.body); },
                          [](const Match& x) { return count_bullets(x.then_p) + count_bullets(x.else_p); },
                      },
                      p->v);
}

}  // namespace bpi::epi
