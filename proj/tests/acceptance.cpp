// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when
// all of them pass.

#include "support.hpp"

#include "bpi/correspond/correspond.hpp"
#include "bpi/cost/cost.hpp"
#include "bpi/epi/engine.hpp"
#include "bpi/translate/translate.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

namespace {

using namespace bpi;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kStateBound = 100'000;
constexpr unsigned kSeeds = 20;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failures;

    void fail(const std::string& why) {
        pass = false;
        if (failures.size() < 8) failures.push_back(why);
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool terminates(const testing::CorpusProgram& p) { return !p.expect_stuck; }

void walk(const butf::Expr& e, const std::function<void(const butf::Expr&)>& f) {
    using namespace butf;
    f(e);
    if (const auto* a = e.as<App>()) walk(a->fun, f), walk(a->arg, f);
    if (const auto* l = e.as<Lambda>()) walk(l->body, f);
    if (const auto* i = e.as<If>()) walk(i->cond, f), walk(i->then_branch, f), walk(i->else_branch, f);
    if (const auto* x = e.as<Index>()) walk(x->target, f), walk(x->index, f);
    if (const auto* a = e.as<Array>())
        for (const auto& x : a->elements) walk(x, f);
    if (const auto* t = e.as<Tuple>())
        for (const auto& x : t->elements) walk(x, f);
}

std::size_t size_iota_steps(const butf::EvalResult& r) {
    return static_cast<std::size_t>(std::count_if(r.trace.begin(), r.trace.end(), [](const butf::TraceEntry& t) {
        return t.rule == butf::Rule::Size || t.rule == butf::Rule::Iota;
    }));
}

Outcome golden_corpus(const std::vector<testing::CorpusProgram>& corpus) {
    Outcome o;
    const auto t0 = Clock::now();
    std::set<butf::Rule> rules;
    bool unary = false, empty_tuple = false, empty_array = false, iota_zero = false;
    bool oob = false, div_zero = false, concat = false, reduce = false;
    for (const auto& p : corpus) {
        const auto r = butf::eval(p.expr, {.fuel = 1'000'000, .record_trace = true});
        for (const auto& t : r.trace) rules.insert(t.rule);
        if (p.expect_stuck) {
            if (r.status != butf::EvalResult::Status::Stuck) o.fail(p.name + " is not stuck");
            walk(r.value, [&](const butf::Expr& e) {
                if (const auto* ix = e.as<butf::Index>()) {
                    const auto* a = ix->target.as<butf::Array>();
                    const auto* n = ix->index.as<butf::Num>();
                    if (a && n && (n->value < 0 || n->value >= a->elements.size())) oob = true;
                }
                if (const auto* a = e.as<butf::App>()) {
                    const auto* b = a->fun.as<butf::Builtin>();
                    const auto* t = a->arg.as<butf::Tuple>();
                    if (b && b->kind == butf::BuiltinKind::Arith && b->op == butf::ArithOp::Div && t &&
                        t->elements.size() == 2 && t->elements[1] == butf::num(0))
                        div_zero = true;
                }
            });
        } else if (!p.expected || r.status != butf::EvalResult::Status::Value || !(r.value == *p.expected)) {
            o.fail(p.name + " evaluates to " + butf::pretty(r.value));
        }
        walk(p.expr, [&](const butf::Expr& e) {
            if (const auto* t = e.as<butf::Tuple>()) {
                empty_tuple = empty_tuple || t->elements.empty();
                unary = unary || t->elements.size() == 1;
            }
            if (const auto* a = e.as<butf::Array>(); a && a->elements.empty()) empty_array = true;
            if (const auto* a = e.as<butf::App>()) {
                const auto* b = a->fun.as<butf::Builtin>();
                const auto* n = a->arg.as<butf::Num>();
                if (b && b->kind == butf::BuiltinKind::Iota && n && n->value == 0) iota_zero = true;
            }
        });
        concat = concat || p.name.find("concat") != std::string::npos;
        reduce = reduce || p.name.find("reduce") != std::string::npos;
    }
    const double secs = seconds_since(t0);
    if (corpus.size() < 30) o.fail("only " + std::to_string(corpus.size()) + " programs");
    if (rules.size() != 8) o.fail("only " + std::to_string(rules.size()) + " of 8 rules exercised");
    const std::pair<const char*, bool> features[] = {
        {"(x,)", unary},     {"()", empty_tuple},        {"[]", empty_array},     {"iota 0", iota_zero},
        {"out-of-bounds stuck", oob}, {"division-by-zero stuck", div_zero}, {"concat", concat}, {"reduce", reduce}};
    for (const auto& [name, seen] : features)
        if (!seen) o.fail(std::string("missing ") + name);
    if (secs >= 5.0) o.fail("took " + std::to_string(secs) + " s");
    o.detail << corpus.size() << " programs, " << rules.size() << "/8 rules, " << secs << " s";
    return o;
}

struct CorpusRuns {
    std::map<std::string, correspond::CorrespondenceReport> strict, literal;
    std::map<std::string, correspond::ExploreReport> explored;
};

CorpusRuns run_corpus(const std::vector<testing::CorpusProgram>& corpus) {
    CorpusRuns out;
    for (const auto& p : corpus) {
        if (!terminates(p)) continue;
        correspond::CheckOptions strict;
        strict.seeds = kSeeds;
        out.strict[p.name] = correspond::check_program(p.expr, strict);
        correspond::CheckOptions literal = strict;
        literal.sim.translation.strict_bullets = false;
        out.literal[p.name] = correspond::check_program(p.expr, literal);
        out.explored[p.name] = correspond::explore_program(p.expr, *p.expected, {}, kStateBound);
    }
    return out;
}

Outcome value_agreement(const std::vector<testing::CorpusProgram>& corpus, const CorpusRuns& runs) {
    Outcome o;
    std::size_t programs = 0, exhaustive = 0;
    for (const auto& p : corpus) {
        if (!terminates(p)) continue;
        ++programs;
        const auto& r = runs.strict.at(p.name);
        if (r.status != "ok") o.fail(p.name + ": status " + r.status);
        if (r.readbacks.size() != kSeeds + 1) o.fail(p.name + ": ran " + std::to_string(r.readbacks.size()) + " schedules");
        if (!r.value_match)
            o.fail(p.name + ": read back " + (r.readbacks.empty() ? "nothing" : r.readbacks.back()) + ", expected " +
                   r.butf_value);
        const auto& x = runs.explored.at(p.name);
        if (x.bound_hit) continue;
        ++exhaustive;
        if (!x.agree) o.fail(p.name + ": terminal configurations disagree");
    }
    o.detail << programs << " terminating programs x " << kSeeds << " seeds + priority, " << exhaustive
             << " explored exhaustively";
    return o;
}

Outcome accounting(const std::vector<testing::CorpusProgram>& corpus, const CorpusRuns& runs) {
    Outcome o;
    std::size_t deficit_total = 0, deviation_total = 0;
    for (const auto& p : corpus) {
        if (!terminates(p)) continue;
        const auto& s = runs.strict.at(p.name);
        for (std::size_t i = 0; i < s.important.size(); ++i)
            if (s.important[i] - s.deviation != s.butf_steps)
                o.fail(p.name + ": strict run " + std::to_string(i) + " has " + std::to_string(s.important[i]) +
                       " important - " + std::to_string(s.deviation) + " vs " + std::to_string(s.butf_steps));
        if (s.size_iota_deficit != 0) o.fail(p.name + ": strict mode reports a deficit");
        deviation_total += s.deviation;

        const auto ev = butf::eval(p.expr, {.fuel = 1'000'000, .record_trace = true});
        const std::size_t want = size_iota_steps(ev);
        const auto& l = runs.literal.at(p.name);
        if (l.size_iota_deficit != want)
            o.fail(p.name + ": literal deficit " + std::to_string(l.size_iota_deficit) + ", counted " +
                   std::to_string(want));
        for (std::size_t i = 0; i < l.important.size(); ++i)
            if (l.important[i] - l.deviation + want != l.butf_steps)
                o.fail(p.name + ": literal run " + std::to_string(i) + " misses by more than the deficit");
        deficit_total += want;
    }
    o.detail << "strict: important - map adjustment = butf steps on every run (adjustment total " << deviation_total
             << "); literal: deficit of " << deficit_total << " size/iota steps shown exactly";
    return o;
}

Outcome values_and_barbs(const std::vector<testing::CorpusProgram>& corpus) {
    Outcome o;
    std::size_t values = 0, others = 0;
    for (const auto& p : corpus) {
        const auto r = correspond::check_value_barb(p.expr, {}, kStateBound);
        if (butf::is_value(p.expr)) {
            ++values;
            if (r.verdict != correspond::BarbVerdict::Yes || r.important_steps != 0)
                o.fail(p.name + ": value does not show the o barb administratively");
        } else {
            ++others;
            if (r.verdict != correspond::BarbVerdict::No) o.fail(p.name + ": o barb before the first important step");
        }
    }
    o.detail << values << " values reach o with 0 important steps, " << others
             << " non-values show no o barb before an important step";
    return o;
}

Outcome broadcast() {
    Outcome o;
    const auto t0 = Clock::now();
    for (int k : {0, 1, 5, 32}) {
        for (bool with_server : {false, true}) {
            std::string text = "new c. (c:<1>";
            for (int i = 0; i < k; ++i) text += " | c(x).o<x>";
            if (with_server) text += " | !c(y).p<y>";
            text += ")";
            const auto start = epi::normalize(epi::parse_process(text));
            const auto tr = epi::run(start, epi::SchedulerPolicy::random(static_cast<std::uint64_t>(k)));
            const std::string tag = "k=" + std::to_string(k) + (with_server ? " +server" : "");
            if (tr.steps.size() != 1) {
                o.fail(tag + ": " + std::to_string(tr.steps.size()) + " steps");
                continue;
            }
            const auto& s = tr.steps.front();
            if (s.rule != epi::RedexKind::Broad) o.fail(tag + ": not a broadcast");
            if (s.participants.size() != static_cast<std::size_t>(k) + 1 + (with_server ? 1 : 0))
                o.fail(tag + ": " + std::to_string(s.participants.size()) + " participants");
            std::size_t receivers = 0, servers = 0, p_out = 0;
            for (const auto& t : tr.final.threads) {
                const auto* a = t.head.as<epi::Act>();
                if (!a) continue;
                if (a->action.kind == epi::Action::Kind::Recv) (t.replicated ? servers : receivers) += 1;
                if (a->action.kind == epi::Action::Kind::Send && epi::pretty(a->action) == "p<1>") ++p_out;
            }
            if (receivers != 0) o.fail(tag + ": receivers left behind");
            if (servers != (with_server ? 1u : 0u)) o.fail(tag + ": replicated receiver did not persist");
            if (p_out != (with_server ? 1u : 0u)) o.fail(tag + ": replicated receiver fired " + std::to_string(p_out) + " times");
        }
    }
    const double secs = seconds_since(t0);
    if (secs >= 1.0) o.fail("took " + std::to_string(secs) + " s");
    o.detail << "k in {0, 1, 5, 32} with and without a replicated receiver, " << secs << " s";
    return o;
}

Outcome well_behavedness(const std::vector<testing::CorpusProgram>& corpus) {
    Outcome o;
    testing::ProgramGen typed(2024), wild(4202, true);
    for (int i = 0; i < 500; ++i) {
        const auto e = i % 2 ? typed.program(4) : wild.wild(4);
        const auto w = translate::well_behaved(translate::translate(e, "o"));
        if (!w) o.fail("fuzz " + butf::pretty(e) + " at " + w.path);
    }
    std::size_t configs = 0;
    for (const auto& p : corpus) {
        epi::RunOptions ro;
        ro.observer = [&](const epi::Config& c, const epi::Step*) {
            ++configs;
            if (const auto w = translate::well_behaved(c); !w) o.fail(p.name + ": config at " + w.path);
        };
        epi::run(epi::normalize(translate::translate(p.expr, "o")), epi::SchedulerPolicy::random(0), ro);
    }
    o.detail << "500 generated programs, " << configs << " intermediate configurations";
    return o;
}

Outcome cost_shapes() {
    Outcome o;
    const auto t0 = Clock::now();
    auto rows_of = [](cost::Family f, const std::vector<std::size_t>& ns) {
        return cost::scaling_experiment(f, ns, {.seeds = {0, 1, 2}});
    };
    const auto arr = rows_of(cost::Family::ArrayOfApps, {1, 2, 4, 8, 16, 32});
    for (const auto& r : arr.rows)
        if (r.cost.work != r.n || r.cost.span != 1)
            o.fail("array-of-apps n=" + std::to_string(r.n) + ": work " + std::to_string(r.cost.work) + " span " +
                   std::to_string(r.cost.span));
    const auto map = rows_of(cost::Family::MapOverIota, {1, 2, 4, 8, 16});
    std::optional<std::uint64_t> span1;
    for (const auto& r : map.rows)
        if (r.n == 1) span1 = std::max(span1.value_or(0), r.cost.span);
    for (const auto& r : map.rows)
        if (!span1 || r.cost.span != *span1)
            o.fail("map-over-iota n=" + std::to_string(r.n) + ": span " + std::to_string(r.cost.span));
    const auto nested = rows_of(cost::Family::NestedApps, {1, 2, 3, 4, 5, 6, 7, 8});
    for (const auto& r : nested.rows)
        if (r.cost.work != r.n || r.cost.span != r.n)
            o.fail("nested-apps k=" + std::to_string(r.n) + ": work " + std::to_string(r.cost.work) + " span " +
                   std::to_string(r.cost.span));
    for (const auto* t : {&arr, &map, &nested})
        if (!t->dropped.empty()) o.fail(std::string(cost::family_name(t->family)) + " timed out");
    const double secs = seconds_since(t0);
    if (secs >= 60.0) o.fail("took " + std::to_string(secs) + " s");
    o.detail << arr.rows.size() + map.rows.size() + nested.rows.size() << " measurements, map span " << span1.value_or(0)
             << " for every n, " << secs << " s";
    return o;
}

Outcome confluence(const std::vector<testing::CorpusProgram>& corpus, const CorpusRuns& runs) {
    Outcome o;
    std::size_t states = 0, largest = 0;
    std::vector<std::string> emitting;
    for (const auto& p : corpus) {
        if (terminates(p)) {
            const auto& x = runs.explored.at(p.name);
            states += x.states;
            largest = std::max(largest, x.states);
            if (x.bound_hit) o.fail(p.name + ": exceeded " + std::to_string(kStateBound) + " configurations");
            if (x.values.size() != 1) o.fail(p.name + ": " + std::to_string(x.values.size()) + " distinct results");
            continue;
        }
        // Stuck programs have no BUTF value; their terminals must still agree.
        epi::ExploreOptions eo;
        eo.state_bound = kStateBound;
        const auto x = epi::explore(epi::normalize(translate::translate(p.expr, "o")), eo);
        states += x.states;
        largest = std::max(largest, x.states);
        if (x.bound_hit) o.fail(p.name + ": exceeded " + std::to_string(kStateBound) + " configurations");
        std::set<std::string> outcomes;
        for (const auto& t : x.terminals) {
            const auto term = correspond::result_term(t);
            outcomes.insert(term ? correspond::pretty(correspond::decode(t, *term)) : "no result");
        }
        if (outcomes.size() != 1) o.fail(p.name + ": " + std::to_string(outcomes.size()) + " distinct outcomes");
        if (outcomes.size() == 1 && *outcomes.begin() != "no result")
            emitting.push_back(p.name + " -> " + *outcomes.begin());
    }
    o.detail << corpus.size() << " programs, " << states << " configurations in total, largest " << largest;
    if (!emitting.empty()) {
        o.detail << "; stuck in BUTF but emitting on o:";
        for (const auto& n : emitting) o.detail << ' ' << n << ';';
    }
    return o;
}

}  // namespace

int main() {
    const auto corpus = testing::load_corpus();
    const auto t0 = Clock::now();
    const CorpusRuns runs = run_corpus(corpus);

    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"1 golden corpus", [&] { return golden_corpus(corpus); }},
        {"2 value agreement", [&] { return value_agreement(corpus, runs); }},
        {"3 step accounting", [&] { return accounting(corpus, runs); }},
        {"4 values and barbs", [&] { return values_and_barbs(corpus); }},
        {"5 broadcast atomicity", [] { return broadcast(); }},
        {"6 well-behavedness", [&] { return well_behavedness(corpus); }},
        {"7 cost shapes", [] { return cost_shapes(); }},
        {"8 result confluence", [&] { return confluence(corpus, runs); }},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        const Outcome o = check();
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail.str() << '\n';
        for (const auto& f : o.failures) std::cout << "         " << f << '\n';
        failed += o.pass ? 0 : 1;
    }
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : "acceptance: all criteria passed")
              << " (" << seconds_since(t0) << " s)\n";
    return failed ? 1 : 0;
}
