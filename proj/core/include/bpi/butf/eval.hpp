#pragma once

// Call-by-value small-step semantics for BUTF under a fixed leftmost strategy.

#include "bpi/butf/expr.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bpi::butf {

/// The axiom that fired in a step.
enum class Rule { Beta, Index, IfTrue, IfFalse, Map, Size, Iota, Arith };

/// The subterm position a step descended through (congruence).
enum class Congruence { AppFun, AppArg, IndexTarget, IndexPos, IfCond, ArrayElem, TupleElem };

std::string_view rule_name(Rule r);
std::string_view congruence_name(Congruence c);

struct Reduced {
    Expr next;
    Rule rule;
    std::vector<Congruence> path;  // outermost first
    Expr redex;                    // the subterm the axiom rewrote
};
struct AlreadyValue {};
struct Stuck {
    std::string reason;
};

using StepOutcome = std::variant<Reduced, AlreadyValue, Stuck>;

StepOutcome step(const Expr& e);

class ArithError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// Exact arithmetic; division truncates toward zero. Throws ArithError on
/// division by zero.
Integer apply_arith(ArithOp op, const Integer& a, const Integer& b);

struct TraceEntry {
    std::uint64_t index;  // 1-based step number
    Rule rule;
    Expr after;
    Expr redex;
};

struct EvalResult {
    enum class Status { Value, Stuck, Diverged };
    Status status = Status::Value;
    Expr value;          // the final expression (a Value when status == Value)
    std::uint64_t steps = 0;
    std::string stuck_reason;
    std::vector<TraceEntry> trace;  // filled when requested
};

struct EvalOptions {
    std::uint64_t fuel = 1'000'000;
    bool record_trace = false;
};

EvalResult eval(const Expr& e, const EvalOptions& opts = {});

/// `#k RULE: <expr>` lines.
std::string format_trace(const std::vector<TraceEntry>& trace);

}  // namespace bpi::butf
