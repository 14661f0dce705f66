#include "bpi/butf/expr.hpp"

#include <cctype>
#include <stdexcept>

namespace bpi::butf {

namespace {

template <typename T>
Expr make(T t) {
    return Expr(std::make_shared<const ExprNode>(ExprNode{std::move(t)}));
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

bool list_equal(const std::vector<Expr>& a, const std::vector<Expr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

void collect_free(const Expr& e, std::set<std::string>& bound, std::set<std::string>& out) {
    std::visit(overloaded{
                   [](const Num&) {},
                   [](const Builtin&) {},
                   [&](const Var& x) {
                       if (!bound.contains(x.name)) out.insert(x.name);
                   },
                   [&](const Array& a) {
                       for (const auto& el : a.elements) collect_free(el, bound, out);
                   },
                   [&](const Tuple& t) {
                       for (const auto& el : t.elements) collect_free(el, bound, out);
                   },
                   [&](const Index& ix) {
                       collect_free(ix.target, bound, out);
                       collect_free(ix.index, bound, out);
                   },
                   [&](const App& ap) {
                       collect_free(ap.fun, bound, out);
                       collect_free(ap.arg, bound, out);
                   },
                   [&](const If& c) {
                       collect_free(c.cond, bound, out);
                       collect_free(c.then_branch, bound, out);
                       collect_free(c.else_branch, bound, out);
                   },
                   [&](const Lambda& l) {
                       const bool fresh = bound.insert(l.param).second;
                       collect_free(l.body, bound, out);
                       if (fresh) bound.erase(l.param);
                   },
               },
               e->v);
}

void collect_all(const Expr& e, std::set<std::string>& out) {
    std::visit(overloaded{
                   [](const Num&) {},
                   [](const Builtin&) {},
                   [&](const Var& x) { out.insert(x.name); },
                   [&](const Array& a) {
                       for (const auto& el : a.elements) collect_all(el, out);
                   },
                   [&](const Tuple& t) {
                       for (const auto& el : t.elements) collect_all(el, out);
                   },
                   [&](const Index& ix) {
                       collect_all(ix.target, out);
                       collect_all(ix.index, out);
                   },
                   [&](const App& ap) {
                       collect_all(ap.fun, out);
                       collect_all(ap.arg, out);
                   },
                   [&](const If& c) {
                       collect_all(c.cond, out);
                       collect_all(c.then_branch, out);
                       collect_all(c.else_branch, out);
                   },
                   [&](const Lambda& l) {
                       out.insert(l.param);
                       collect_all(l.body, out);
                   },
               },
               e->v);
}

std::string fresh_variant(const std::string& base, const std::set<std::string>& avoid) {
    for (unsigned k = 1;; ++k) {
        std::string candidate = base + "_" + std::to_string(k);
        if (!avoid.contains(candidate)) return candidate;
    }
}

Expr subst(const Expr& e, const std::string& x, const Expr& v, const std::set<std::string>& v_free) {
    auto map_list = [&](const std::vector<Expr>& xs) {
        std::vector<Expr> out;
        out.reserve(xs.size());
        for (const auto& el : xs) out.push_back(subst(el, x, v, v_free));
        return out;
    };
    return std::visit(
        overloaded{
            [&](const Num&) { return e; },
            [&](const Builtin&) { return e; },
            [&](const Var& y) { return y.name == x ? v : e; },
            [&](const Array& a) { return array(map_list(a.elements)); },
            [&](const Tuple& t) { return tuple(map_list(t.elements)); },
            [&](const Index& ix) { return index(subst(ix.target, x, v, v_free), subst(ix.index, x, v, v_free)); },
            [&](const App& ap) { return app(subst(ap.fun, x, v, v_free), subst(ap.arg, x, v, v_free)); },
            [&](const If& c) {
                return if_(subst(c.cond, x, v, v_free), subst(c.then_branch, x, v, v_free),
                           subst(c.else_branch, x, v, v_free));
            },
            [&](const Lambda& l) -> Expr {
                if (l.param == x) return e;
                auto body_free = free_vars(l.body);
                if (!body_free.contains(x)) return e;
                if (!v_free.contains(l.param)) return lambda(l.param, subst(l.body, x, v, v_free));
                std::set<std::string> avoid = all_identifiers(l.body);
                avoid.insert(v_free.begin(), v_free.end());
                avoid.insert(x);
                std::string renamed = fresh_variant(l.param, avoid);
                Expr body = subst(l.body, l.param, var(renamed), {renamed});
                return lambda(renamed, subst(body, x, v, v_free));
            },
        },
        e->v);
}

void count(const Expr& e, NodeCounts& c) {
    std::visit(overloaded{
                   [](const Num&) {},
                   [](const Builtin&) {},
                   [](const Var&) {},
                   [&](const Array& a) {
                       for (const auto& el : a.elements) count(el, c);
                   },
                   [&](const Tuple& t) {
                       for (const auto& el : t.elements) count(el, c);
                   },
                   [&](const Index& ix) {
                       ++c.indexes;
                       count(ix.target, c);
                       count(ix.index, c);
                   },
                   [&](const App& ap) {
                       ++c.apps;
                       if (const auto* b = ap.fun.as<Builtin>()) {
                           ++c.builtin_head_apps;
                           if (b->kind == BuiltinKind::Size || b->kind == BuiltinKind::Iota) ++c.size_iota_head_apps;
                       }
                       count(ap.fun, c);
                       count(ap.arg, c);
                   },
                   [&](const If& i) {
                       ++c.ifs;
                       count(i.cond, c);
                       count(i.then_branch, c);
                       count(i.else_branch, c);
                   },
                   [&](const Lambda& l) { count(l.body, c); },
               },
               e->v);
}

}  // namespace

char arith_symbol(ArithOp op) {
    switch (op) {
        case ArithOp::Add: return '+';
        case ArithOp::Sub: return '-';
        case ArithOp::Mul: return '*';
        case ArithOp::Div: return '/';
    }
    return '?';
}

std::string_view builtin_name(const Builtin& b) {
    switch (b.kind) {
        case BuiltinKind::Map: return "map";
        case BuiltinKind::Iota: return "iota";
        case BuiltinKind::Size: return "size";
        case BuiltinKind::Arith:
            switch (b.op) {
                case ArithOp::Add: return "(+)";
                case ArithOp::Sub: return "(-)";
                case ArithOp::Mul: return "(*)";
                case ArithOp::Div: return "(/)";
            }
    }
    return "?";
}

Expr::Expr() : node_(std::make_shared<const ExprNode>(ExprNode{Num{0}})) {}

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (a->v.index() != b->v.index()) return false;
    return std::visit(
        overloaded{
            [&](const Num& x) { return x.value == b.as<Num>()->value; },
            [&](const Var& x) { return x.name == b.as<Var>()->name; },
            [&](const Builtin& x) { return x == *b.as<Builtin>(); },
            [&](const Array& x) { return list_equal(x.elements, b.as<Array>()->elements); },
            [&](const Tuple& x) { return list_equal(x.elements, b.as<Tuple>()->elements); },
            [&](const Index& x) {
                const auto* y = b.as<Index>();
                return x.target == y->target && x.index == y->index;
            },
            [&](const Lambda& x) {
                const auto* y = b.as<Lambda>();
                return x.param == y->param && x.body == y->body;
            },
            [&](const App& x) {
                const auto* y = b.as<App>();
                return x.fun == y->fun && x.arg == y->arg;
            },
            [&](const If& x) {
                const auto* y = b.as<If>();
                return x.cond == y->cond && x.then_branch == y->then_branch && x.else_branch == y->else_branch;
            },
        },
        a->v);
}

Expr num(Integer n) { return make(Num{std::move(n)}); }
Expr var(std::string name) { return make(Var{std::move(name)}); }
Expr array(std::vector<Expr> elements) { return make(Array{std::move(elements)}); }
Expr index(Expr target, Expr idx) { return make(Index{std::move(target), std::move(idx)}); }
Expr lambda(std::string param, Expr body) { return make(Lambda{std::move(param), std::move(body)}); }
Expr app(Expr fun, Expr arg) { return make(App{std::move(fun), std::move(arg)}); }
Expr tuple(std::vector<Expr> elements) { return make(Tuple{std::move(elements)}); }
Expr if_(Expr c, Expr t, Expr e) { return make(If{std::move(c), std::move(t), std::move(e)}); }
Expr builtin(Builtin b) { return make(b); }
Expr builtin(BuiltinKind kind) { return make(Builtin{kind, ArithOp::Add}); }
Expr arith(ArithOp op) { return make(Builtin{BuiltinKind::Arith, op}); }
Expr binop(ArithOp op, Expr lhs, Expr rhs) { return app(arith(op), tuple({std::move(lhs), std::move(rhs)})); }

bool is_value(const Expr& e) {
    return std::visit(overloaded{
                          [](const Num&) { return true; },
                          [](const Builtin&) { return true; },
                          [](const Lambda&) { return true; },
                          [](const Array& a) {
                              for (const auto& el : a.elements)
                                  if (!is_value(el)) return false;
                              return true;
                          },
                          [](const Tuple& t) {
                              for (const auto& el : t.elements)
                                  if (!is_value(el)) return false;
                              return true;
                          },
                          [](const auto&) { return false; },
                      },
                      e->v);
}

std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> bound, out;
    collect_free(e, bound, out);
    return out;
}

std::set<std::string> all_identifiers(const Expr& e) {
    std::set<std::string> out;
    collect_all(e, out);
    return out;
}

Expr substitute(const Expr& e, const std::string& x, const Expr& v) { return subst(e, x, v, free_vars(v)); }

NodeCounts count_nodes(const Expr& e) {
    NodeCounts c;
    count(e, c);
    return c;
}

bool is_keyword(std::string_view s) {
    return s == "if" || s == "then" || s == "else" || s == "map" || s == "iota" || s == "size";
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    const auto c0 = static_cast<unsigned char>(s[0]);
    if (!(std::isalpha(c0) || s[0] == '_')) return false;
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (!(std::isalnum(c) || ch == '_')) return false;
    }
    return !is_keyword(s);
}

}  // namespace bpi::butf
