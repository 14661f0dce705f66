#include "bpi/translate/translate.hpp"

#include <cctype>

namespace bpi::translate {

using namespace epi;
using butf::Expr;

std::string_view role_prefix(Role r) {
    switch (r) {
        case Role::Output: return "o";
        case Role::Handle: return "h";
        case Role::Signal: return "d";
        case Role::Collection: return "vals";
        case Role::Function: return "f";
        case Role::ReplyR: return "r";
        case Role::Counter: return "c";
    }
    return "?";
}

std::optional<Role> role_of(std::string_view name) {
    name = name.substr(0, name.find_first_of("#~"));
    while (!name.empty() && std::isdigit(static_cast<unsigned char>(name.back()))) name.remove_suffix(1);
    for (Role r : {Role::Output, Role::Handle, Role::Signal, Role::Collection, Role::Function, Role::ReplyR,
                   Role::Counter})
        if (name == role_prefix(r)) return r;
    return std::nullopt;
}

std::string options_header(const TranslationOptions& opts) {
    return std::string("-- translation: strict_bullets=") + (opts.strict_bullets ? "on" : "off") +
           " parallel_repeat=" + (opts.parallel_repeat ? "on" : "off");
}

std::string FreshNames::next(const std::string& prefix) {
    for (;;) {
        std::string n = prefix + std::to_string(++counters_[prefix]);
        if (!avoid_.contains(n)) return n;
    }
}

Process cell(const Term& h, const Term& i, const Term& v, const std::string& reply_var) {
    return par(repl(act(recv(chan(h, Label::Kind::All), {reply_var}), act(send(chan(tvar(reply_var)), {i, v})))),
               repl(act(send(chan_index(h, i), {i, v}))));
}

Process repeat(const Term& s, const Term& r, const Term& d, const TranslationOptions& opts, const std::string& counter,
               const std::string& var) {
    const Term n = tvar(var);
    const Term prev = tbin(butf::ArithOp::Sub, n, tnum(1));
    const Term c = tname(counter);
    Process emit = opts.parallel_repeat
                       ? par(act(send(chan(r), {prev, prev})), act(send(chan(c), {prev})))
                       : act(send(chan(r), {prev, prev}), act(send(chan(c), {prev})));
    Process loop = repl(act(recv(chan(c), {var}),
                            match(n, Cmp::Ge, tnum(opts.parallel_repeat ? 0 : 1), std::move(emit),
                                  act(send(chan(d), {})))));
    return new_(counter, par(std::move(loop), act(send(chan(c), {s}))));
}

namespace {

Process maybe_bullet(Process p, bool on) { return on ? bullet(std::move(p)) : p; }

class Translator {
   public:
    Translator(const Expr& root, const TranslationOptions& opts) : fresh_(butf::all_identifiers(root)), opts_(opts) {}

    Process go(const Expr& e, const Term& o) {
        if (const auto* n = e.as<butf::Num>()) return act(send(chan(o), {tnum(n->value)}));
        if (const auto* x = e.as<butf::Var>()) return act(send(chan(o), {tvar(x->name)}));
        if (const auto* l = e.as<butf::Lambda>()) {
            const std::string f = fresh_.name(Role::Function);
            const std::string r = fresh_.var("r");
            Process server = repl(act(recv(chan(tname(f)), {l->param, r}), go(l->body, tvar(r))));
            return new_(f, par(act(send(chan(o), {tname(f)})), std::move(server)));
        }
        if (const auto* b = e.as<butf::Builtin>()) {
            const std::string f = fresh_.name(Role::Function);
            const std::string x = fresh_.var("x");
            const std::string r = fresh_.var("r");
            Process body = builtin_body(*b, tvar(x), tvar(r), false, fresh_, opts_);
            Process server = repl(act(recv(chan(tname(f)), {x, r}), std::move(body)));
            return new_(f, par(act(send(chan(o), {tname(f)})), std::move(server)));
        }
        if (const auto* a = e.as<butf::App>()) {
            if (const auto* b = a->fun.as<butf::Builtin>()) {
                const bool bulleted = opts_.strict_bullets || b->kind == butf::BuiltinKind::Map ||
                                      b->kind == butf::BuiltinKind::Arith;
                const std::string o1 = fresh_.name(Role::Output);
                Process arg = go(a->arg, tname(o1));
                const std::string x = fresh_.var("x");
                Process body = builtin_body(*b, tvar(x), o, bulleted, fresh_, opts_);
                return new_(o1, par(std::move(arg), act(recv(chan(tname(o1)), {x}), std::move(body))));
            }
            const std::string o1 = fresh_.name(Role::Output);
            const std::string o2 = fresh_.name(Role::Output);
            Process fun = go(a->fun, tname(o1));
            Process arg = go(a->arg, tname(o2));
            const std::string g = fresh_.var("g");
            const std::string v = fresh_.var("v");
            Process call = bullet(act(send(chan(tvar(g)), {tvar(v), o})));
            Process wait = act(recv(chan(tname(o1)), {g}), act(recv(chan(tname(o2)), {v}), std::move(call)));
            return new_all({o1, o2}, par_all({std::move(fun), std::move(arg), std::move(wait)}));
        }
        if (const auto* c = e.as<butf::If>()) {
            const std::string o1 = fresh_.name(Role::Output);
            Process cond = go(c->cond, tname(o1));
            const std::string v = fresh_.var("v");
            Process then_p = go(c->then_branch, o);
            Process else_p = go(c->else_branch, o);
            Process branch = bullet(match(tvar(v), Cmp::Ne, tnum(0), std::move(then_p), std::move(else_p)));
            return new_(o1, par(std::move(cond), act(recv(chan(tname(o1)), {v}), std::move(branch))));
        }
        if (const auto* ix = e.as<butf::Index>()) {
            const std::string o1 = fresh_.name(Role::Output);
            const std::string o2 = fresh_.name(Role::Output);
            Process target = go(ix->target, tname(o1));
            Process pos = go(ix->index, tname(o2));
            const std::string h = fresh_.var("a");
            const std::string i = fresh_.var("i");
            const std::string v = fresh_.var("v");
            Process read = act(recv(chan_index(tvar(h), tvar(i)), {std::nullopt, v}), act(send(chan(o), {tvar(v)})));
            Process guard = bullet(match(tvar(i), Cmp::Ge, tnum(0), std::move(read), nil()));
            Process wait = act(recv(chan(tname(o1)), {h}), act(recv(chan(tname(o2)), {i}), std::move(guard)));
            return new_all({o1, o2}, par_all({std::move(target), std::move(pos), std::move(wait)}));
        }
        if (const auto* t = e.as<butf::Tuple>())
            return gather(t->elements, o, [&](const std::string& h, const std::vector<Term>& vs) {
                return repl(act(send(chan(tname(h), Label::Kind::Tup), vs)));
            });
        if (const auto* arr = e.as<butf::Array>())
            return gather(arr->elements, o, [&](const std::string& h, const std::vector<Term>& vs) {
                std::vector<Process> parts;
                for (std::size_t k = 0; k < vs.size(); ++k)
                    parts.push_back(cell(tname(h), tnum(Integer(k)), vs[k], fresh_.var("k")));
                parts.push_back(
                    repl(act(send(chan(tname(h), Label::Kind::Len), {tnum(Integer(vs.size()))}))));
                return par_all(std::move(parts));
            });
        throw std::logic_error("translate: unknown expression");
    }

   private:
    FreshNames fresh_;
    TranslationOptions opts_;

    // νo1…νon.νh.(⟦e1⟧_o1 | … | o1(v1)…on(vn).(Server(h, v⃗) | ō⟨h⟩))
    template <typename ServerFn>
    Process gather(const std::vector<Expr>& elems, const Term& o, ServerFn server) {
        std::vector<std::string> outs;
        for (std::size_t k = 0; k < elems.size(); ++k) outs.push_back(fresh_.name(Role::Output));
        const std::string h = fresh_.name(Role::Handle);
        std::vector<Process> parts;
        for (std::size_t k = 0; k < elems.size(); ++k) parts.push_back(go(elems[k], tname(outs[k])));
        std::vector<std::string> vars;
        std::vector<Term> vals;
        for (std::size_t k = 0; k < elems.size(); ++k) {
            vars.push_back(fresh_.var("v"));
            vals.push_back(tvar(vars.back()));
        }
        Process body = par(server(h, vals), act(send(chan(o), {tname(h)})));
        for (std::size_t k = elems.size(); k-- > 0;) body = act(recv(chan(tname(outs[k])), {vars[k]}), std::move(body));
        parts.push_back(std::move(body));
        std::vector<std::string> binders = outs;
        binders.push_back(h);
        return new_all(binders, par_all(std::move(parts)));
    }
};

}  // namespace

Process builtin_body(const butf::Builtin& b, const Term& arg, const Term& out, bool bulleted, FreshNames& fresh,
                     const TranslationOptions& opts) {
    switch (b.kind) {
        case butf::BuiltinKind::Size: {
            const std::string n = fresh.var("n");
            return maybe_bullet(act(recv(chan(arg, Label::Kind::Len), {n}), act(send(chan(out), {tvar(n)}))),
                                bulleted);
        }
        case butf::BuiltinKind::Arith: {
            const std::string a = fresh.var("n");
            const std::string c = fresh.var("n");
            Term result = tbin(b.op, tvar(a), tvar(c));
            return maybe_bullet(act(recv(chan(arg, Label::Kind::Tup), {a, c}), act(send(chan(out), {result}))),
                                bulleted);
        }
        case butf::BuiltinKind::Iota: {
            const std::string vals = fresh.name(Role::Collection);
            const std::string h = fresh.name(Role::Handle);
            const std::string d = fresh.name(Role::Signal);
            const std::string c = fresh.name(Role::Counter);
            const std::string n = fresh.var("n");
            const std::string i = fresh.var("i");
            const std::string v = fresh.var("v");
            Process rep = repeat(arg, tname(vals), tname(d), opts, c, n);
            Process finish = maybe_bullet(
                act(recv(chan(tname(d)), {}),
                    par(repl(act(send(chan(tname(h), Label::Kind::Len), {arg}))), act(send(chan(out), {tname(h)})))),
                bulleted);
            Process cells = repl(act(recv(chan(tname(vals)), {i, v}), cell(tname(h), tvar(i), tvar(v), fresh.var("k"))));
            return new_all({vals, h, d}, par_all({std::move(rep), std::move(finish), std::move(cells)}));
        }
        case butf::BuiltinKind::Map: {
            const std::string func = fresh.var("g");
            const std::string h = fresh.var("a");
            const std::string n = fresh.var("n");
            const std::string vals = fresh.name(Role::Collection);
            const std::string count = fresh.name(Role::Collection);
            const std::string done = fresh.name(Role::Signal);
            const std::string h2 = fresh.name(Role::Handle);
            const std::string c = fresh.name(Role::Counter);
            const std::string rn = fresh.var("n");
            const std::string index = fresh.var("i");
            const std::string value = fresh.var("v");
            const std::string r = fresh.name(Role::ReplyR);
            const std::string v = fresh.var("v");
            const std::string dummy = fresh.name(Role::Output);

            Process rep = repeat(tvar(n), tname(count), tname(done), opts, c, rn);
            Process worker = repl(act(
                recv(chan(tname(vals)), {index, value}),
                new_(r, act(send(chan(tvar(func)), {tvar(value), tname(r)}),
                            act(recv(chan(tname(r)), {v}),
                                act(recv(chan(tname(count)), {std::nullopt, std::nullopt}),
                                    cell(tname(h2), tvar(index), tvar(v), fresh.var("k"))))))));
            Process finish = new_(dummy, act(send(chan(tvar(func)), {tnum(0), tname(dummy)}),
                                             maybe_bullet(act(recv(chan(tname(done)), {}),
                                                              act(send(chan(out), {tname(h2)}))),
                                                          bulleted)));
            Process len = repl(act(send(chan(tname(h2), Label::Kind::Len), {tvar(n)})));
            Process fanout = new_all(
                {count, done, h2}, par_all({std::move(rep), std::move(worker), std::move(finish), std::move(len)}));
            Process scatter = new_(vals, act(broadcast(chan(tvar(h), Label::Kind::All), {tname(vals)}), std::move(fanout)));
            return act(recv(chan(arg, Label::Kind::Tup), {func, h}),
                       act(recv(chan(tvar(h), Label::Kind::Len), {n}), std::move(scatter)));
        }
    }
    throw std::logic_error("builtin_body: unknown builtin");
}

Process translate(const Expr& e, const std::string& out, const TranslationOptions& opts) {
    Translator t(e, opts);
    return t.go(e, tname(out));
}

std::size_t expected_bullets(const Expr& e, const TranslationOptions& opts) {
    const auto n = butf::count_nodes(e);
    std::size_t total = n.apps + n.ifs + n.indexes;
    if (!opts.strict_bullets) total -= n.size_iota_head_apps;
    return total;
}

}  // namespace bpi::translate
