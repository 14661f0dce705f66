#pragma once

// Abstract syntax of BUTF, the untyped functional array language.
//
// Expressions are immutable trees shared through `std::shared_ptr<const>`;
// copying an Expr is cheap and never deep-copies. All helpers here are pure.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bpi {

using Integer = boost::multiprecision::cpp_int;

namespace butf {

enum class ArithOp { Add, Sub, Mul, Div };

enum class BuiltinKind { Map, Iota, Size, Arith };

struct Builtin {
    BuiltinKind kind = BuiltinKind::Map;
    ArithOp op = ArithOp::Add;  // meaningful only for Arith

    friend bool operator==(const Builtin& a, const Builtin& b) {
        return a.kind == b.kind && (a.kind != BuiltinKind::Arith || a.op == b.op);
    }
};

char arith_symbol(ArithOp op);
std::string_view builtin_name(const Builtin& b);

struct ExprNode;

class Expr {
   public:
    Expr();  // Num 0
    explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

    const ExprNode& node() const { return *node_; }
    const ExprNode* operator->() const { return node_.get(); }

    template <typename T>
    const T* as() const;
    template <typename T>
    bool is() const {
        return as<T>() != nullptr;
    }

    friend bool operator==(const Expr& a, const Expr& b);
    friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

   private:
    std::shared_ptr<const ExprNode> node_;
};

struct Num {
    Integer value;
};
struct Var {
    std::string name;
};
struct Array {
    std::vector<Expr> elements;
};
struct Index {
    Expr target;
    Expr index;
};
struct Lambda {
    std::string param;
    Expr body;
};
struct App {
    Expr fun;
    Expr arg;
};
struct Tuple {
    std::vector<Expr> elements;
};
struct If {
    Expr cond;
    Expr then_branch;
    Expr else_branch;
};

struct ExprNode {
    std::variant<Num, Var, Array, Index, Lambda, App, Tuple, If, Builtin> v;
};

template <typename T>
const T* Expr::as() const {
    return std::get_if<T>(&node_->v);
}

// Constructors.
Expr num(Integer n);
Expr var(std::string name);
Expr array(std::vector<Expr> elements);
Expr index(Expr target, Expr idx);
Expr lambda(std::string param, Expr body);
Expr app(Expr fun, Expr arg);
Expr tuple(std::vector<Expr> elements);
Expr if_(Expr cond, Expr then_branch, Expr else_branch);
Expr builtin(Builtin b);
Expr builtin(BuiltinKind kind);
Expr arith(ArithOp op);
/// `lhs op rhs`, i.e. the arithmetic builtin applied to a pair.
Expr binop(ArithOp op, Expr lhs, Expr rhs);

/// True iff `e` is in the value grammar: constants, builtins, abstractions,
/// and arrays/tuples whose elements are all values.
bool is_value(const Expr& e);

std::set<std::string> free_vars(const Expr& e);

/// Every identifier occurring in `e`, bound or free.
std::set<std::string> all_identifiers(const Expr& e);

/// Capture-avoiding substitution e{x ↦ v}. Binders that would capture a free
/// variable of `v` are renamed to `<name>_<k>` for the smallest fresh k.
Expr substitute(const Expr& e, const std::string& x, const Expr& v);

/// Number of nodes of each syntactic class; used by the bullet census.
struct NodeCounts {
    std::size_t apps = 0;
    std::size_t builtin_head_apps = 0;  // App whose function is a Builtin literal
    std::size_t size_iota_head_apps = 0;
    std::size_t ifs = 0;
    std::size_t indexes = 0;
};
NodeCounts count_nodes(const Expr& e);

bool is_identifier(std::string_view s);
bool is_keyword(std::string_view s);

}  // namespace butf
}  // namespace bpi
