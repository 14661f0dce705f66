#include "bpi/butf/eval.hpp"
#include "bpi/butf/syntax.hpp"
#include "bpi/correspond/correspond.hpp"
#include "bpi/cost/cost.hpp"
#include "bpi/epi/engine.hpp"
#include "bpi/translate/translate.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace bpi;

// Sum of 0..5 through a Z combinator.
constexpr const char* kReduce =
    "(\\f. (\\x. f (\\v. x x v)) (\\x. f (\\v. x x v)))"
    " (\\r. \\i. if i then (i - 1) + r (i - 1) else 0) 6";

void BM_Parse(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(butf::parse(kReduce));
}
BENCHMARK(BM_Parse);

void BM_EvalNestedApps(benchmark::State& state) {
    const auto e = cost::family_program(cost::Family::NestedApps, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(butf::eval(e));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EvalNestedApps)->RangeMultiplier(2)->Range(1, 64)->Complexity();

void BM_EvalReduce(benchmark::State& state) {
    const auto e = butf::parse(kReduce);
    for (auto _ : state) benchmark::DoNotOptimize(butf::eval(e));
}
BENCHMARK(BM_EvalReduce);

void BM_Translate(benchmark::State& state) {
    const auto e = cost::family_program(cost::Family::ArrayOfApps, state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(translate::translate(e, "o"));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Translate)->RangeMultiplier(2)->Range(1, 64)->Complexity();

void BM_RunArrayOfApps(benchmark::State& state) {
    const auto c = epi::normalize(translate::translate(cost::family_program(cost::Family::ArrayOfApps, state.range(0)), "o"));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(epi::run(c, epi::SchedulerPolicy::random(seed++)));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RunArrayOfApps)->RangeMultiplier(2)->Range(1, 32)->Complexity();

void BM_RunMapOverIota(benchmark::State& state) {
    const auto c = epi::normalize(translate::translate(cost::family_program(cost::Family::MapOverIota, state.range(0)), "o"));
    for (auto _ : state) benchmark::DoNotOptimize(epi::run(c, epi::SchedulerPolicy::priority()));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RunMapOverIota)->RangeMultiplier(2)->Range(1, 16)->Complexity();

void BM_Broadcast(benchmark::State& state) {
    std::string text = "c:<1>";
    for (int i = 0; i < state.range(0); ++i) text += " | c(x).0";
    const auto c = epi::normalize(epi::parse_process(text));
    for (auto _ : state) benchmark::DoNotOptimize(epi::run(c, epi::SchedulerPolicy::priority()));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Broadcast)->RangeMultiplier(4)->Range(1, 256)->Complexity();

void BM_Explore(benchmark::State& state) {
    const auto c = epi::normalize(translate::translate(butf::parse("[(\\x. x) 1, (\\y. y + 1) 2, size [3]]"), "o"));
    epi::ExploreOptions eo;
    eo.reduce = state.range(0) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(epi::explore(c, eo));
    state.SetLabel(eo.reduce ? "reduced" : "full");
}
BENCHMARK(BM_Explore)->Arg(0)->Arg(1);

void BM_CheckProgram(benchmark::State& state) {
    const auto e = butf::parse("map ((\\x. x * x), iota 4)");
    correspond::CheckOptions opts;
    opts.seeds = 5;
    for (auto _ : state) benchmark::DoNotOptimize(correspond::check_program(e, opts));
}
BENCHMARK(BM_CheckProgram);

}  // namespace

BENCHMARK_MAIN();
