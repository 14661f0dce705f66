#include "bpi/butf/eval.hpp"

#include "bpi/butf/syntax.hpp"

#include <sstream>

namespace bpi::butf {

std::string_view rule_name(Rule r) {
    switch (r) {
        case Rule::Beta: return "E-BETA";
        case Rule::Index: return "E-INDEX";
        case Rule::IfTrue: return "E-IF-TRUE";
        case Rule::IfFalse: return "E-IF-FALSE";
        case Rule::Map: return "E-MAP";
        case Rule::Size: return "E-SIZE";
        case Rule::Iota: return "E-IOTA";
        case Rule::Arith: return "E-ARITH";
    }
    return "?";
}

std::string_view congruence_name(Congruence c) {
    switch (c) {
        case Congruence::AppFun: return "E-APP-1";
        case Congruence::AppArg: return "E-APP-2";
        case Congruence::IndexTarget: return "E-INDEX-1";
        case Congruence::IndexPos: return "E-INDEX-2";
        case Congruence::IfCond: return "E-IF-COND";
        case Congruence::ArrayElem: return "E-ARRAY-ELEM";
        case Congruence::TupleElem: return "E-TUPLE-ELEM";
    }
    return "?";
}

Integer apply_arith(ArithOp op, const Integer& a, const Integer& b) {
    switch (op) {
        case ArithOp::Add: return a + b;
        case ArithOp::Sub: return a - b;
        case ArithOp::Mul: return a * b;
        case ArithOp::Div:
            if (b == 0) throw ArithError("division by zero");
            return a / b;  // cpp_int truncates toward zero
    }
    throw ArithError("unknown arithmetic operator");
}

namespace {

Reduced fire(Expr next, Rule rule, const Expr& redex) { return Reduced{std::move(next), rule, {}, redex}; }

StepOutcome wrap(StepOutcome inner, Congruence c, auto rebuild) {
    if (auto* r = std::get_if<Reduced>(&inner)) {
        r->next = rebuild(r->next);
        r->path.insert(r->path.begin(), c);
    }
    return inner;
}

// Steps the leftmost non-value element; nullopt when all are values.
std::optional<StepOutcome> step_elements(const std::vector<Expr>& xs, Congruence c, bool is_array) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (is_value(xs[i])) continue;
        return wrap(step(xs[i]), c, [&](const Expr& n) {
            std::vector<Expr> copy = xs;
            copy[i] = n;
            return is_array ? array(std::move(copy)) : tuple(std::move(copy));
        });
    }
    return std::nullopt;
}

StepOutcome apply_builtin(const Builtin& b, const Expr& arg, const Expr& redex) {
    switch (b.kind) {
        case BuiltinKind::Map: {
            const auto* t = arg.as<Tuple>();
            if (!t || t->elements.size() != 2) return Stuck{"map expects a (function, array) pair"};
            const auto* f = t->elements[0].as<Lambda>();
            const auto* a = t->elements[1].as<Array>();
            if (!f || !a) return Stuck{"map expects a (function, array) pair"};
            std::vector<Expr> out;
            out.reserve(a->elements.size());
            for (const auto& v : a->elements) out.push_back(substitute(f->body, f->param, v));
            return fire(array(std::move(out)), Rule::Map, redex);
        }
        case BuiltinKind::Size: {
            const auto* a = arg.as<Array>();
            if (!a) return Stuck{"size expects an array"};
            return fire(num(Integer(a->elements.size())), Rule::Size, redex);
        }
        case BuiltinKind::Iota: {
            const auto* n = arg.as<Num>();
            if (!n) return Stuck{"iota expects a number"};
            if (n->value < 0) return Stuck{"iota expects a non-negative number"};
            std::vector<Expr> out;
            for (Integer i = 0; i < n->value; ++i) out.push_back(num(i));
            return fire(array(std::move(out)), Rule::Iota, redex);
        }
        case BuiltinKind::Arith: {
            const auto* t = arg.as<Tuple>();
            if (!t || t->elements.size() != 2) return Stuck{"arithmetic expects a pair of numbers"};
            const auto* x = t->elements[0].as<Num>();
            const auto* y = t->elements[1].as<Num>();
            if (!x || !y) return Stuck{"arithmetic expects a pair of numbers"};
            try {
                return fire(num(apply_arith(b.op, x->value, y->value)), Rule::Arith, redex);
            } catch (const ArithError& err) {
                return Stuck{err.what()};
            }
        }
    }
    return Stuck{"unknown builtin"};
}

}  // namespace

StepOutcome step(const Expr& e) {
    if (is_value(e)) return AlreadyValue{};

    if (const auto* x = e.as<Var>()) return Stuck{"free variable '" + x->name + "'"};

    if (const auto* a = e.as<Array>()) return *step_elements(a->elements, Congruence::ArrayElem, true);
    if (const auto* t = e.as<Tuple>()) return *step_elements(t->elements, Congruence::TupleElem, false);

    if (const auto* ap = e.as<App>()) {
        if (!is_value(ap->fun))
            return wrap(step(ap->fun), Congruence::AppFun, [&](const Expr& n) { return app(n, ap->arg); });
        if (!is_value(ap->arg))
            return wrap(step(ap->arg), Congruence::AppArg, [&](const Expr& n) { return app(ap->fun, n); });
        if (const auto* l = ap->fun.as<Lambda>()) return fire(substitute(l->body, l->param, ap->arg), Rule::Beta, e);
        if (const auto* b = ap->fun.as<Builtin>()) return apply_builtin(*b, ap->arg, e);
        return Stuck{"application of a non-function"};
    }

    if (const auto* ix = e.as<Index>()) {
        if (!is_value(ix->target))
            return wrap(step(ix->target), Congruence::IndexTarget,
                        [&](const Expr& n) { return index(n, ix->index); });
        if (!is_value(ix->index))
            return wrap(step(ix->index), Congruence::IndexPos, [&](const Expr& n) { return index(ix->target, n); });
        const auto* arr = ix->target.as<Array>();
        if (!arr) return Stuck{"index target not an array"};
        const auto* i = ix->index.as<Num>();
        if (!i) return Stuck{"index is not a number"};
        if (i->value < 0 || i->value >= arr->elements.size()) return Stuck{"index out of bounds"};
        return fire(arr->elements[static_cast<std::size_t>(i->value)], Rule::Index, e);
    }

    if (const auto* c = e.as<If>()) {
        if (!is_value(c->cond))
            return wrap(step(c->cond), Congruence::IfCond,
                        [&](const Expr& n) { return if_(n, c->then_branch, c->else_branch); });
        const auto* n = c->cond.as<Num>();
        if (n && n->value == 0) return fire(c->else_branch, Rule::IfFalse, e);
        return fire(c->then_branch, Rule::IfTrue, e);
    }

    return Stuck{"no rule applies"};
}

EvalResult eval(const Expr& e, const EvalOptions& opts) {
    EvalResult r;
    Expr cur = e;
    for (;;) {
        StepOutcome out = step(cur);
        if (std::holds_alternative<AlreadyValue>(out)) {
            r.status = EvalResult::Status::Value;
            break;
        }
        if (auto* s = std::get_if<Stuck>(&out)) {
            r.status = EvalResult::Status::Stuck;
            r.stuck_reason = s->reason;
            break;
        }
        if (r.steps >= opts.fuel) {
            r.status = EvalResult::Status::Diverged;
            break;
        }
        auto& red = std::get<Reduced>(out);
        ++r.steps;
        if (opts.record_trace) r.trace.push_back({r.steps, red.rule, red.next, red.redex});
        cur = std::move(red.next);
    }
    r.value = cur;
    return r;
}

std::string format_trace(const std::vector<TraceEntry>& trace) {
    std::ostringstream os;
    for (const auto& t : trace) os << '#' << t.index << ' ' << rule_name(t.rule) << ": " << pretty(t.after) << '\n';
    return os.str();
}

}  // namespace bpi::butf
