// bpi: command-line front end for the BUTF evaluator, the Eπ engine, the
// translation and the correspondence / cost checks.

#include "bpi/butf/eval.hpp"
#include "bpi/butf/syntax.hpp"
#include "bpi/correspond/correspond.hpp"
#include "bpi/cost/cost.hpp"
#include "bpi/epi/engine.hpp"
#include "bpi/translate/translate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using json = nlohmann::json;
using namespace bpi;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string input;
    std::string expr;
    std::uint64_t seed = 0;
    std::uint64_t fuel = 1'000'000;
    bool literal_bullets = false;
    bool parallel_repeat = false;
    bool gc = false;
    bool permissive = false;
    std::string format = "text";
};

std::uint64_t default_fuel() {
    if (const char* env = std::getenv("BPI_FUEL")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring malformed BPI_FUEL\n";
        }
    }
    return 1'000'000;
}

void add_common(CLI::App* cmd, Common& c, bool with_input = true) {
    if (with_input) {
        cmd->add_option("input", c.input, "program file (.butf, or .epi for simulate/explore)");
        cmd->add_option("-e,--expr", c.expr, "inline program text");
    }
    cmd->add_option("--seed", c.seed, "scheduler seed")->capture_default_str();
    cmd->add_option("--fuel", c.fuel, "step budget (default from BPI_FUEL, else 1000000)")->capture_default_str();
    cmd->add_flag("--literal", c.literal_bullets, "omit the size/iota bullets");
    cmd->add_flag("--parallel-repeat", c.parallel_repeat, "use the [n >= 0] Repeat guard with parallel emission");
    cmd->add_flag("--gc", c.gc, "collect unreachable replicated servers");
    cmd->add_flag("--permissive", c.permissive, "drop faulting threads instead of aborting");
    cmd->add_option("--format", c.format, "text | json | csv")
        ->check(CLI::IsMember({"text", "json", "csv"}))
        ->capture_default_str();
}

std::string read_source(const Common& c) {
    if (!c.expr.empty()) return c.expr;
    if (c.input.empty()) throw UsageError("no program given (pass a file or --expr)");
    std::ifstream in(c.input);
    if (!in) throw UsageError("cannot read '" + c.input + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

translate::TranslationOptions translation(const Common& c) {
    translate::TranslationOptions t;
    t.strict_bullets = !c.literal_bullets;
    t.parallel_repeat = c.parallel_repeat;
    return t;
}

correspond::SimOptions sim_options(const Common& c) {
    correspond::SimOptions s;
    s.budget = c.fuel;
    s.translation = translation(c);
    s.strict = !c.permissive;
    s.gc = c.gc;
    return s;
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

json barbs_json(const std::set<epi::Barb>& bs) {
    json out = json::array();
    for (const auto& b : bs) out.push_back(b.channel + (b.out ? ":out" : ":in"));
    return out;
}

json trace_json(const epi::Trace& tr) {
    json steps = json::array();
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        const auto& s = tr.steps[i];
        json step = {{"idx", i + 1},
                     {"kind", s.kind == epi::Step::Kind::Important ? "important" : "administrative"},
                     {"rule", std::string(epi::redex_rule_name(s.rule))},
                     {"depth", s.depth_after}};
        step["channel"] = s.channel.empty() ? json(nullptr) : json(s.channel);
        if (!s.label.empty()) step["label"] = s.label;
        steps.push_back(std::move(step));
    }
    json j = {{"steps", steps},
              {"work", tr.work},
              {"span", tr.span},
              {"admin_steps", tr.admin_steps},
              {"barbs", barbs_json(tr.final_barbs)},
              {"status", std::string(epi::status_name(tr.status))}};
    if (!tr.faults.empty()) {
        json fs = json::array();
        for (const auto& f : tr.faults) fs.push_back(f.message);
        j["faults"] = fs;
    }
    if (!tr.diagnostics.empty()) j["diagnostics"] = tr.diagnostics;
    return j;
}

void print_trace_text(const epi::Trace& tr) {
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
        const auto& s = tr.steps[i];
        std::cout << '#' << (i + 1) << ' ' << (s.kind == epi::Step::Kind::Important ? "* " : "  ")
                  << epi::redex_rule_name(s.rule);
        if (!s.channel.empty()) std::cout << ' ' << s.channel;
        if (!s.label.empty()) std::cout << " [" << s.label << ']';
        std::cout << " depth=" << s.depth_after << '\n';
    }
    std::cout << "status: " << epi::status_name(tr.status) << "\nwork: " << tr.work << "\nspan: " << tr.span
              << "\nadmin_steps: " << tr.admin_steps << "\nbarbs:";
    for (const auto& b : tr.final_barbs) std::cout << ' ' << b.channel << (b.out ? ":out" : ":in");
    std::cout << '\n';
    for (const auto& f : tr.faults) std::cout << "fault: " << f.message << '\n';
    for (const auto& d : tr.diagnostics) std::cout << "diagnostic: " << d << '\n';
}

int cmd_run(const Common& c, bool trace) {
    const auto e = butf::parse(read_source(c));
    butf::EvalOptions eo;
    eo.fuel = c.fuel;
    eo.record_trace = trace || c.format == "json";
    const auto r = butf::eval(e, eo);
    const char* status = r.status == butf::EvalResult::Status::Value   ? "value"
                         : r.status == butf::EvalResult::Status::Stuck ? "stuck"
                                                                        : "diverged";
    if (c.format == "json") {
        json steps = json::array();
        for (const auto& t : r.trace)
            steps.push_back({{"idx", t.index}, {"rule", std::string(butf::rule_name(t.rule))},
                             {"expr", butf::pretty(t.after)}});
        json j = {{"program", butf::pretty(e)}, {"status", status}, {"steps", r.steps},
                  {"value", butf::pretty(r.value)}, {"trace", steps}};
        if (!r.stuck_reason.empty()) j["stuck_reason"] = r.stuck_reason;
        print(j);
    } else {
        if (trace) std::cout << butf::format_trace(r.trace);
        std::cout << status << ": " << butf::pretty(r.value) << "\nsteps: " << r.steps << '\n';
        if (!r.stuck_reason.empty()) std::cout << "reason: " << r.stuck_reason << '\n';
    }
    return r.status == butf::EvalResult::Status::Value ? kOk : kFail;
}

int cmd_translate(const Common& c, const std::string& out) {
    const auto e = butf::parse(read_source(c));
    const auto opts = translation(c);
    const auto p = translate::translate(e, out, opts);
    if (c.format == "json") {
        print({{"program", butf::pretty(e)},
               {"process", epi::pretty(p)},
               {"strict_bullets", opts.strict_bullets},
               {"parallel_repeat", opts.parallel_repeat},
               {"bullets", epi::count_bullets(p)}});
    } else {
        std::cout << translate::options_header(opts) << '\n' << epi::pretty(p) << '\n';
    }
    return kOk;
}

bool is_epi_input(const Common& c, const std::string& raw) {
    return !raw.empty() || (c.expr.empty() && c.input.size() > 4 && c.input.ends_with(".epi"));
}

epi::SchedulerPolicy policy_of(const Common& c, const std::string& scheduler) {
    return scheduler == "priority" ? epi::SchedulerPolicy::priority() : epi::SchedulerPolicy::random(c.seed);
}

int cmd_simulate(const Common& c, const std::string& raw, const std::string& scheduler) {
    epi::RunOptions ro;
    ro.budget = c.fuel;
    ro.engine.strict = !c.permissive;
    ro.gc = c.gc;
    epi::Trace tr;
    std::optional<correspond::ReadBack> result;
    if (is_epi_input(c, raw)) {
        const auto p = epi::parse_process(raw.empty() ? read_source(c) : raw);
        tr = epi::run(epi::normalize(p), policy_of(c, scheduler), ro);
        if (auto t = correspond::result_term(tr.final)) result = correspond::decode(tr.final, *t);
    } else {
        const auto e = butf::parse(read_source(c));
        const auto ev = butf::eval(e);
        const butf::Expr* shape = ev.status == butf::EvalResult::Status::Value ? &ev.value : nullptr;
        auto rr = correspond::simulate_to_result(e, policy_of(c, scheduler), sim_options(c), shape);
        tr = std::move(rr.trace);
        result = std::move(rr.readback);
    }
    if (c.format == "json") {
        json j = trace_json(tr);
        j["result"] = result ? json(correspond::pretty(*result)) : json(nullptr);
        print(j);
    } else {
        print_trace_text(tr);
        if (result) std::cout << "result: " << correspond::pretty(*result) << '\n';
    }
    return tr.status == epi::Trace::Status::Faulted ? kFail : kOk;
}

int cmd_check(const Common& c, unsigned seeds, bool explore, std::size_t bound) {
    const auto e = butf::parse(read_source(c));
    correspond::CheckOptions co;
    co.seeds = seeds;
    co.sim = sim_options(c);
    co.eval.fuel = c.fuel;
    co.explore = explore;
    co.state_bound = bound;
    const auto r = correspond::check_program(e, co);
    const bool pass = r.status == "ok" && r.value_match && r.accounting_match &&
                      (!explore || (r.exploration.agree && !r.exploration.bound_hit));
    if (c.format == "json") {
        json j = {{"program", r.program},
                  {"mode", r.mode},
                  {"status", r.status},
                  {"butf_value", r.butf_value},
                  {"butf_steps", r.butf_steps},
                  {"important", {{"min", r.important_min}, {"max", r.important_max}, {"per_seed", r.important}}},
                  {"readbacks", r.readbacks},
                  {"value_match", r.value_match},
                  {"deviations", r.deviations},
                  {"deviation_total", r.deviation},
                  {"size_iota_deficit", r.size_iota_deficit},
                  {"expected_important", r.expected_important},
                  {"adjusted_important", r.important.empty() ? 0 : r.important_max - r.deviation},
                  {"accounting_match", r.accounting_match},
                  {"seeds_run", r.seeds_run},
                  {"pass", pass}};
        if (explore)
            j["exploration"] = {{"states", r.exploration.states},
                                {"terminals", r.exploration.terminals},
                                {"bound_hit", r.exploration.bound_hit},
                                {"values", r.exploration.values},
                                {"agree", r.exploration.agree}};
        print(j);
    } else {
        std::cout << "program: " << r.program << "\nmode: " << r.mode << "\nstatus: " << r.status
                  << "\nbutf value: " << r.butf_value << "\nbutf steps: " << r.butf_steps;
        if (!r.important.empty()) {
            std::cout << "\nimportant steps: min " << r.important_min << ", max " << r.important_max
                      << "\nread-back: " << r.readbacks.back() << "\nvalue match: " << (r.value_match ? "yes" : "no");
            for (const auto& d : r.deviations) std::cout << "\ndeviation: " << d;
            if (r.size_iota_deficit) std::cout << "\nsize/iota deficit: " << r.size_iota_deficit;
            std::cout << "\nexpected important: " << r.expected_important
                      << "\naccounting match: " << (r.accounting_match ? "yes" : "no");
        }
        if (explore)
            std::cout << "\nexploration: " << r.exploration.states << " states, " << r.exploration.terminals
                      << " terminals" << (r.exploration.bound_hit ? " (bound hit)" : "")
                      << ", agree: " << (r.exploration.agree ? "yes" : "no");
        std::cout << "\n" << (pass ? "PASS" : "FAIL") << '\n';
    }
    return pass ? kOk : kFail;
}

int cmd_cost(const Common& c, unsigned seeds) {
    const auto e = butf::parse(read_source(c));
    cost::MeasureOptions mo;
    mo.seeds.clear();
    for (unsigned s = 0; s < seeds; ++s) mo.seeds.push_back(c.seed + s);
    mo.budget = c.fuel;
    mo.translation = translation(c);
    const auto r = cost::measure(e, mo);
    if (c.format == "json") {
        json runs = json::array();
        for (const auto& rc : r.runs)
            runs.push_back({{"seed", rc.seed}, {"work", rc.work}, {"span", rc.span}, {"admin_steps", rc.admin_steps},
                            {"status", std::string(epi::status_name(rc.status))}});
        print({{"program", butf::pretty(e)},
               {"work", r.work},
               {"span", r.span},
               {"admin_steps", r.admin_steps},
               {"consistent", r.consistent},
               {"runs", runs}});
    } else if (c.format == "csv") {
        std::cout << "seed,work,span,admin_steps\n";
        for (const auto& rc : r.runs) std::cout << rc.seed << ',' << rc.work << ',' << rc.span << ',' << rc.admin_steps << '\n';
    } else {
        std::cout << "work: " << r.work << "\nspan: " << r.span << "\nadmin_steps: " << r.admin_steps
                  << "\nconsistent across seeds: " << (r.consistent ? "yes" : "no") << '\n';
    }
    return r.timed_out ? kFail : kOk;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoul(item));
        } catch (const std::exception&) {
            throw UsageError("bad size '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("no sizes given");
    return out;
}

int cmd_scale(const Common& c, const std::string& family, const std::string& sizes, const std::string& body,
              unsigned seeds) {
    const auto fam = cost::parse_family(family);
    if (!fam) throw UsageError("unknown family '" + family + "'");
    cost::MeasureOptions mo;
    mo.seeds.clear();
    for (unsigned s = 0; s < seeds; ++s) mo.seeds.push_back(c.seed + s);
    mo.budget = c.fuel;
    mo.translation = translation(c);
    const auto b = body.empty() ? butf::lambda("x", butf::var("x")) : butf::parse(body);
    const auto t = cost::scaling_experiment(*fam, parse_sizes(sizes), mo, b);
    const auto v = cost::fit_check(t);
    if (c.format == "csv") {
        std::cout << cost::to_csv(t);
    } else if (c.format == "json") {
        json rows = json::array();
        for (const auto& r : t.rows)
            rows.push_back({{"family", std::string(cost::family_name(t.family))}, {"n", r.n}, {"seed", r.cost.seed},
                            {"work", r.cost.work}, {"span", r.cost.span}, {"admin_steps", r.cost.admin_steps}});
        print({{"family", std::string(cost::family_name(t.family))},
               {"predicted", t.predicted},
               {"rows", rows},
               {"dropped", t.dropped},
               {"fit", {{"work_ok", v.work_ok}, {"span_ok", v.span_ok}, {"work", v.work_detail}, {"span", v.span_detail}}}});
    } else {
        std::cout << cost::family_name(t.family) << " (" << t.predicted << ")\n" << cost::to_csv(t)
                  << "work " << v.work_detail << (v.work_ok ? " ok" : " FAIL") << "\nspan " << v.span_detail
                  << (v.span_ok ? " ok" : " FAIL") << '\n';
    }
    return v.ok() && t.dropped.empty() ? kOk : kFail;
}

int cmd_explore(const Common& c, const std::string& raw, std::size_t bound, bool reduce) {
    epi::ExploreOptions eo;
    eo.state_bound = bound;
    eo.engine.strict = !c.permissive;
    eo.gc = c.gc;
    eo.reduce = reduce;
    json values = json::array();
    std::vector<std::string> text_values;
    epi::ExploreResult res;
    if (is_epi_input(c, raw)) {
        res = epi::explore(epi::normalize(epi::parse_process(raw.empty() ? read_source(c) : raw)), eo);
        for (const auto& t : res.terminals) text_values.push_back(epi::canonical_key(t));
    } else {
        const auto e = butf::parse(read_source(c));
        const auto ev = butf::eval(e);
        res = epi::explore(epi::normalize(translate::translate(e, "o", translation(c))), eo);
        for (const auto& t : res.terminals) {
            auto term = correspond::result_term(t);
            correspond::ReadBack rb = !term ? correspond::ReadBack::incomplete("o")
                                      : ev.status == butf::EvalResult::Status::Value
                                          ? correspond::read_back(t, *term, ev.value, c.fuel)
                                          : correspond::decode(t, *term);
            text_values.push_back(correspond::pretty(rb));
        }
    }
    std::sort(text_values.begin(), text_values.end());
    text_values.erase(std::unique(text_values.begin(), text_values.end()), text_values.end());
    if (c.format == "json") {
        print({{"states", res.states},
               {"terminals", res.terminals.size()},
               {"bound_hit", res.bound_hit},
               {"faults", res.faults},
               {"distinct", text_values}});
    } else {
        std::cout << "states: " << res.states << "\nterminals: " << res.terminals.size()
                  << "\nbound hit: " << (res.bound_hit ? "yes" : "no") << "\nfaulted transitions: " << res.faults
                  << "\ndistinct terminal outcomes: " << text_values.size() << '\n';
        for (const auto& v : text_values) std::cout << "---\n" << v << (v.ends_with('\n') ? "" : "\n");
    }
    return res.bound_hit ? kFail : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BUTF / Eπ toolkit: evaluate, translate, simulate, check and measure programs"};
    app.require_subcommand(1);
    Common c;
    c.fuel = default_fuel();

    auto* run = app.add_subcommand("run", "evaluate a BUTF program");
    bool trace = false;
    add_common(run, c);
    run->add_flag("--trace", trace, "print every step");

    auto* tr = app.add_subcommand("translate", "emit the Eπ translation of a BUTF program");
    std::string out = "o";
    add_common(tr, c);
    tr->add_option("--out", out, "name of the result channel")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "run a translated program (or raw Eπ) and print the trace");
    std::string raw, scheduler = "random";
    add_common(sim, c);
    sim->add_option("--raw", raw, "inline Eπ process text");
    sim->add_option("--scheduler", scheduler, "random | priority")
        ->check(CLI::IsMember({"random", "priority"}))
        ->capture_default_str();

    auto* chk = app.add_subcommand("check", "compare both semantics on a program");
    unsigned seeds = 20;
    bool explore = false;
    std::size_t bound = 100'000;
    add_common(chk, c);
    chk->add_option("--seeds", seeds, "number of random schedules")->capture_default_str();
    chk->add_flag("--explore", explore, "also explore every schedule");
    chk->add_option("--state-bound", bound, "exploration state bound")->capture_default_str();

    auto* cst = app.add_subcommand("cost", "measure work and span");
    unsigned cost_seeds = 3;
    add_common(cst, c);
    cst->add_option("--seeds", cost_seeds, "number of seeds")->capture_default_str();

    auto* scl = app.add_subcommand("scale", "measure a program family over sizes");
    std::string family = "array-of-apps", sizes = "1,2,4,8", body;
    unsigned scale_seeds = 3;
    add_common(scl, c, false);
    scl->add_option("--family", family, "array-of-apps | map-over-iota | nested-apps")->capture_default_str();
    scl->add_option("--sizes", sizes, "comma-separated sizes")->capture_default_str();
    scl->add_option("--body", body, "function mapped by map-over-iota (default \\x. x)");
    scl->add_option("--seeds", scale_seeds, "seeds per size")->capture_default_str();

    auto* exp = app.add_subcommand("explore", "enumerate every reachable terminal state");
    std::string exp_raw;
    std::size_t exp_bound = 100'000;
    bool no_reduce = false;
    add_common(exp, c);
    exp->add_option("--raw", exp_raw, "inline Eπ process text");
    exp->add_option("--state-bound", exp_bound, "state bound")->capture_default_str();
    exp->add_flag("--no-reduce", no_reduce, "expand every redex in every state");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (run->parsed()) return cmd_run(c, trace);
        if (tr->parsed()) return cmd_translate(c, out);
        if (sim->parsed()) return cmd_simulate(c, raw, scheduler);
        if (chk->parsed()) return cmd_check(c, seeds, explore, bound);
        if (cst->parsed()) return cmd_cost(c, cost_seeds);
        if (scl->parsed()) return cmd_scale(c, family, sizes, body, scale_seeds);
        if (exp->parsed()) return cmd_explore(c, exp_raw, exp_bound, !no_reduce);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const butf::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kUsage;
    } catch (const epi::SyntaxError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
    return kUsage;
}
