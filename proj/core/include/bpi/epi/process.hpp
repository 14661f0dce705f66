#pragma once

// Process terms of the extended pi-calculus: polyadic channels, broadcast
// output, first-order composite names (base·label), replication, restriction,
// bullet-marked important prefixes and comparison guards.

#include "bpi/butf/expr.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bpi::epi {

using butf::ArithOp;

struct TermNode;

/// T ::= n | a | x | T ⊙ T
class Term {
   public:
    Term();  // Num 0
    explicit Term(std::shared_ptr<const TermNode> n) : node_(std::move(n)) {}
    const TermNode& node() const { return *node_; }
    const TermNode* operator->() const { return node_.get(); }
    template <typename T>
    const T* as() const;
    template <typename T>
    bool is() const {
        return as<T>() != nullptr;
    }

    friend bool operator==(const Term& a, const Term& b);
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

   private:
    std::shared_ptr<const TermNode> node_;
};

struct TNum {
    Integer value;
};
struct TName {
    std::string id;
};
struct TVar {
    std::string id;
};
struct TBin {
    ArithOp op;
    Term lhs;
    Term rhs;
};

struct TermNode {
    std::variant<TNum, TName, TVar, TBin> v;
};

template <typename T>
const T* Term::as() const {
    return std::get_if<T>(&node_->v);
}

Term tnum(Integer n);
Term tname(std::string id);
Term tvar(std::string id);
Term tbin(ArithOp op, Term lhs, Term rhs);

class TermError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Folds arithmetic over numbers; names are opaque fixed points. Throws
/// TermError for arithmetic on a name, division by zero, or an open variable.
Term eval_term(const Term& t);

/// I ::= n | x | all | tup | len
struct Label {
    enum class Kind { Index, All, Tup, Len };
    Kind kind = Kind::All;
    Term index;  // Kind::Index only: a number or a variable

    friend bool operator==(const Label& a, const Label& b) {
        return a.kind == b.kind && (a.kind != Kind::Index || a.index == b.index);
    }
};

/// c ::= a | x | a·I | x·I
struct ChannelId {
    Term base;
    std::optional<Label> suffix;

    friend bool operator==(const ChannelId& a, const ChannelId& b) {
        return a.base == b.base && a.suffix == b.suffix;
    }
};

ChannelId chan(Term base);
ChannelId chan(Term base, Label::Kind kind);
ChannelId chan_index(Term base, Term index);

/// The printable key of a channel once its base is a name and its index
/// label (if any) is a number, e.g. `h#3.len` or `h#3.2`; nullopt otherwise.
std::optional<std::string> channel_key(const ChannelId& c);

/// A receive pattern: a variable or the wildcard `_` (nullopt).
using Pattern = std::optional<std::string>;

struct Action {
    enum class Kind { Send, Recv, Broadcast };
    Kind kind = Kind::Send;
    ChannelId channel;
    std::vector<Term> args;        // Send / Broadcast
    std::vector<Pattern> params;   // Recv

    std::size_t arity() const { return kind == Kind::Recv ? params.size() : args.size(); }

    friend bool operator==(const Action& a, const Action& b) {
        return a.kind == b.kind && a.channel == b.channel && a.args == b.args && a.params == b.params;
    }
};

enum class Cmp { Lt, Gt, Le, Ge, Eq, Ne };
std::string_view cmp_symbol(Cmp c);

struct ProcNode;

class Process {
   public:
    Process();  // 0
    explicit Process(std::shared_ptr<const ProcNode> n) : node_(std::move(n)) {}
    const ProcNode& node() const { return *node_; }
    const ProcNode* operator->() const { return node_.get(); }
    template <typename T>
    const T* as() const;
    template <typename T>
    bool is() const {
        return as<T>() != nullptr;
    }

    friend bool operator==(const Process& a, const Process& b);
    friend bool operator!=(const Process& a, const Process& b) { return !(a == b); }

   private:
    std::shared_ptr<const ProcNode> node_;
};

struct Nil {};
struct Par {
    Process left;
    Process right;
};
struct Repl {
    Process body;
};
struct New {
    std::string name;
    Process body;
};
struct Act {
    Action action;
    Process cont;
};
struct Bullet {
    Process body;
};
struct Match {
    Term lhs;
    Cmp cmp;
    Term rhs;
    Process then_p;
    Process else_p;
};

struct ProcNode {
    std::variant<Nil, Par, Repl, New, Act, Bullet, Match> v;
};

template <typename T>
const T* Process::as() const {
    return std::get_if<T>(&node_->v);
}

Process nil();
Process par(Process l, Process r);
/// Left-nested parallel composition of all parts; `0` when empty.
Process par_all(std::vector<Process> parts);
Process repl(Process body);
Process new_(std::string name, Process body);
Process new_all(const std::vector<std::string>& names, Process body);
Process act(Action a, Process cont = nil());
Process bullet(Process body);
Process match(Term lhs, Cmp cmp, Term rhs, Process then_p, Process else_p = nil());

Action send(ChannelId c, std::vector<Term> args);
Action recv(ChannelId c, std::vector<Pattern> params);
Action broadcast(ChannelId c, std::vector<Term> args);

/// Simultaneous substitution of closed terms for variables and names for
/// names. Receive patterns shadow variables; restrictions shadow names and are
/// renamed when they would capture a substituted name.
struct Substitution {
    std::map<std::string, Term> vars;
    std::map<std::string, std::string> names;
    bool empty() const { return vars.empty() && names.empty(); }
};
Term subst_term(const Term& t, const Substitution& s);
ChannelId subst_channel(const ChannelId& c, const Substitution& s);
Process subst(const Process& p, const Substitution& s);

std::set<std::string> free_names(const Process& p);
std::set<std::string> free_vars(const Process& p);
void collect_term_names(const Term& t, std::set<std::string>& out);

/// Number of Bullet nodes, counting replicated bodies once.
std::size_t count_bullets(const Process& p);

// Text syntax:
//   P ::= 0 | P '|' P | '!' P | 'new' a (',' a)* '.' P | A ('.' P)? | '*' P
//       | '[' T cmp T ']' P ',' P | '(' P ')'
//   A ::= c '<' T,* '>' | c '(' x,* ')' | c ':<' T,* '>'
//   c ::= id ('.' (n | -n | id | 'all' | 'tup' | 'len'))?
// Identifiers bound by an enclosing receive are variables; all others are
// names. `_` is the wildcard pattern and `--` starts a line comment.

class SyntaxError : public std::runtime_error {
   public:
    SyntaxError(std::size_t line, std::size_t column, const std::string& what);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

   private:
    std::size_t line_;
    std::size_t column_;
};

Process parse_process(std::string_view text);
std::string pretty(const Process& p);
std::string pretty(const Term& t);
std::string pretty(const ChannelId& c);
std::string pretty(const Action& a);

}  // namespace bpi::epi
