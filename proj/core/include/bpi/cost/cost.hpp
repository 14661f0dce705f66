#pragma once

// Work and span of translated programs, and scaling tables over program
// families.

#include "bpi/butf/expr.hpp"
#include "bpi/epi/engine.hpp"
#include "bpi/translate/translate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bpi::cost {

struct RunCost {
    std::uint64_t seed = 0;
    std::uint64_t work = 0;
    std::uint64_t span = 0;
    std::uint64_t admin_steps = 0;
    epi::Trace::Status status = epi::Trace::Status::Quiescent;
};

struct CostReport {
    std::uint64_t work = 0;  // maximum over runs
    std::uint64_t span = 0;
    std::uint64_t admin_steps = 0;
    bool consistent = true;  // every run agrees on work and span
    bool timed_out = false;
    std::vector<RunCost> runs;
};

struct MeasureOptions {
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::uint64_t budget = 1'000'000;
    translate::TranslationOptions translation;
};

CostReport measure(const butf::Expr& e, const MeasureOptions& opts = {});

enum class Family { ArrayOfApps, MapOverIota, NestedApps };

std::string_view family_name(Family f);
std::optional<Family> parse_family(std::string_view name);

/// ArrayOfApps(n) = [(\x. x) 1, …, (\x. x) n]
/// MapOverIota(n, body) = map((body), iota n)
/// NestedApps(k) = (\x1. (\x2. … (\xk. xk) x(k-1) …) x1) 0
butf::Expr family_program(Family f, std::size_t n, const butf::Expr& body = butf::lambda("x", butf::var("x")));

struct ScalingRow {
    std::size_t n = 0;
    RunCost cost;
};

struct ScalingTable {
    Family family = Family::ArrayOfApps;
    std::string predicted;  // expected shape, human readable
    std::vector<ScalingRow> rows;  // one per (n, seed), n increasing
    std::vector<std::size_t> dropped;  // sizes whose runs timed out
};

ScalingTable scaling_experiment(Family f, const std::vector<std::size_t>& sizes, const MeasureOptions& opts = {},
                                const butf::Expr& body = butf::lambda("x", butf::var("x")));

struct FitVerdict {
    bool work_ok = false;
    bool span_ok = false;
    std::string work_detail;
    std::string span_detail;
    bool ok() const { return work_ok && span_ok; }
};

/// Exact first-difference test: all points lie on one line.
bool is_linear(const std::vector<std::pair<std::size_t, std::uint64_t>>& points);
/// max − min ≤ slack.
bool is_constant(const std::vector<std::pair<std::size_t, std::uint64_t>>& points, std::uint64_t slack = 0);

/// Checks the family's predicted shapes: ArrayOfApps work linear / span
/// constant, MapOverIota work affine / span constant, NestedApps work and
/// span linear.
FitVerdict fit_check(const ScalingTable& t, std::uint64_t span_slack = 0);

/// Long format: family,n,seed,work,span,admin_steps
std::string to_csv(const ScalingTable& t, bool header = true);

}  // namespace bpi::cost
