#pragma once

// Runs a program under both semantics, reads results back out of the
// process, and checks step accounting and value agreement.

#include "bpi/butf/eval.hpp"
#include "bpi/butf/expr.hpp"
#include "bpi/epi/engine.hpp"
#include "bpi/translate/translate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bpi::correspond {

struct ReadBack {
    enum class Kind { Num, Array, Tuple, Function, Incomplete };
    Kind kind = Kind::Num;
    Integer num;
    std::vector<ReadBack> items;
    std::string name;  // Function: the handle; Incomplete: the blocking channel

    static ReadBack number(Integer n);
    static ReadBack array(std::vector<ReadBack> xs);
    static ReadBack tuple(std::vector<ReadBack> xs);
    static ReadBack function(std::string handle);
    static ReadBack incomplete(std::string channel);

    friend bool operator==(const ReadBack& a, const ReadBack& b);
};

std::string pretty(const ReadBack& r);

/// Structural equality; any function value matches any FunctionOpaque.
bool value_equal(const butf::Expr& v, const ReadBack& r);

/// The payload of the pending send on the free channel `out`, if any.
std::optional<epi::Term> result_term(const epi::Config& c, const std::string& out = "o");

/// Reads `result` back by injecting probe threads into `c` and running them
/// to quiescence. `shape` (a BUTF value) supplies tuple arities.
ReadBack read_back(const epi::Config& c, const epi::Term& result, const butf::Expr& shape,
                   std::uint64_t budget = 1'000'000);

/// Decodes `result` by inspecting server threads directly (no shape needed).
ReadBack decode(const epi::Config& c, const epi::Term& result);

struct SimOptions {
    std::uint64_t budget = 1'000'000;
    translate::TranslationOptions translation;
    bool strict = true;
    bool gc = false;
    std::string out = "o";
};

struct RunReport {
    epi::Trace trace;
    std::optional<ReadBack> readback;  // empty when no result was sent on `out`
    std::uint64_t important_steps = 0;
};

/// Runs ⟦e⟧_out to quiescence and reads the result back (shape-guided when
/// `shape` is given, otherwise decoded).
RunReport simulate_to_result(const butf::Expr& e, const epi::SchedulerPolicy& policy, const SimOptions& opts = {},
                             const butf::Expr* shape = nullptr);

struct CheckOptions {
    unsigned seeds = 20;
    SimOptions sim;
    butf::EvalOptions eval;
    bool explore = false;
    std::size_t state_bound = 100'000;
};

struct ExploreReport {
    bool ran = false;
    std::size_t states = 0;
    std::size_t terminals = 0;
    bool bound_hit = false;
    std::vector<std::string> values;  // distinct read-back values across terminals
    bool agree = false;               // exactly one value, equal to the BUTF value
};

struct CorrespondenceReport {
    std::string program;
    std::string mode;  // "strict" or "literal"
    std::string status;  // ok | stuck | diverged | timeout | faulted | stuck-in-process
    std::string butf_value;
    std::uint64_t butf_steps = 0;
    std::vector<std::uint64_t> important;  // per seed, then the priority run
    std::uint64_t important_min = 0;
    std::uint64_t important_max = 0;
    std::vector<std::string> readbacks;    // per run, same order
    bool value_match = false;
    std::uint64_t deviation = 0;           // dummy-call bullets from map
    std::vector<std::string> deviations;
    std::uint64_t size_iota_deficit = 0;   // size/iota steps without a bullet
    std::uint64_t expected_important = 0;  // butf_steps - deficit
    bool accounting_match = false;         // important - deviation == expected, every run
    unsigned seeds_run = 0;
    ExploreReport exploration;
};

CorrespondenceReport check_program(const butf::Expr& e, const CheckOptions& opts = {});

enum class BarbVerdict { Yes, No, Unknown };

struct ValueBarbReport {
    BarbVerdict verdict = BarbVerdict::Unknown;
    std::size_t states = 0;
    std::uint64_t important_steps = 0;  // of the witnessing run (always 0)
};

/// Whether ⟦e⟧_o can show an out-barb on `o` using administrative steps only.
ValueBarbReport check_value_barb(const butf::Expr& e, const SimOptions& opts = {},
                                 std::size_t state_bound = 100'000);

/// Explores ⟦e⟧_o exhaustively and reads back every terminal configuration.
ExploreReport explore_program(const butf::Expr& e, const butf::Expr& shape, const SimOptions& opts = {},
                              std::size_t state_bound = 100'000);

}  // namespace bpi::correspond
