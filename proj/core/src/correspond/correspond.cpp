#include "bpi/correspond/correspond.hpp"

#include "bpi/butf/syntax.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace bpi::correspond {

using namespace epi;
using butf::Expr;

ReadBack ReadBack::number(Integer n) {
    ReadBack r;
    r.kind = Kind::Num;
    r.num = std::move(n);
    return r;
}

ReadBack ReadBack::array(std::vector<ReadBack> xs) {
    ReadBack r;
    r.kind = Kind::Array;
    r.items = std::move(xs);
    return r;
}

ReadBack ReadBack::tuple(std::vector<ReadBack> xs) {
    ReadBack r;
    r.kind = Kind::Tuple;
    r.items = std::move(xs);
    return r;
}

ReadBack ReadBack::function(std::string handle) {
    ReadBack r;
    r.kind = Kind::Function;
    r.name = std::move(handle);
    return r;
}

ReadBack ReadBack::incomplete(std::string channel) {
    ReadBack r;
    r.kind = Kind::Incomplete;
    r.name = std::move(channel);
    return r;
}

bool operator==(const ReadBack& a, const ReadBack& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ReadBack::Kind::Num: return a.num == b.num;
        case ReadBack::Kind::Array:
        case ReadBack::Kind::Tuple: return a.items == b.items;
        case ReadBack::Kind::Function: return true;
        case ReadBack::Kind::Incomplete: return a.name == b.name;
    }
    return false;
}

std::string pretty(const ReadBack& r) {
    std::ostringstream os;
    auto list = [&](const std::vector<ReadBack>& xs) {
        for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? ", " : "") << pretty(xs[i]);
    };
    switch (r.kind) {
        case ReadBack::Kind::Num: os << r.num; break;
        case ReadBack::Kind::Array:
            os << '[';
            list(r.items);
            os << ']';
            break;
        case ReadBack::Kind::Tuple:
            os << '(';
            list(r.items);
            if (r.items.size() == 1) os << ',';
            os << ')';
            break;
        case ReadBack::Kind::Function: os << "<function>"; break;
        case ReadBack::Kind::Incomplete: os << "<incomplete " << r.name << '>'; break;
    }
    return os.str();
}

bool value_equal(const Expr& v, const ReadBack& r) {
    if (const auto* n = v.as<butf::Num>()) return r.kind == ReadBack::Kind::Num && r.num == n->value;
    if (v.is<butf::Lambda>() || v.is<butf::Builtin>()) return r.kind == ReadBack::Kind::Function;
    const std::vector<Expr>* elems = nullptr;
    ReadBack::Kind want;
    if (const auto* a = v.as<butf::Array>()) {
        elems = &a->elements;
        want = ReadBack::Kind::Array;
    } else if (const auto* t = v.as<butf::Tuple>()) {
        elems = &t->elements;
        want = ReadBack::Kind::Tuple;
    } else {
        return false;
    }
    if (r.kind != want || r.items.size() != elems->size()) return false;
    for (std::size_t i = 0; i < elems->size(); ++i)
        if (!value_equal((*elems)[i], r.items[i])) return false;
    return true;
}

std::optional<Term> result_term(const Config& c, const std::string& out) {
    if (c.restricted.contains(out)) return std::nullopt;
    for (const auto& t : c.threads) {
        const auto* a = t.head.as<Act>();
        if (!a || t.replicated || a->action.kind != Action::Kind::Send || a->action.channel.suffix) continue;
        const auto* base = a->action.channel.base.as<TName>();
        if (!base || base->id != out || a->action.args.size() != 1) continue;
        try {
            return eval_term(a->action.args[0]);
        } catch (const TermError&) {
            return a->action.args[0];
        }
    }
    return std::nullopt;
}

namespace {

constexpr std::size_t kMaxProbedLength = 1'000'000;

class Prober {
   public:
    Prober(const Config& c, std::uint64_t budget) : cfg_(c), budget_(budget) {}

    ReadBack read(const Term& t, const Expr& shape) {
        Term v;
        try {
            v = eval_term(t);
        } catch (const TermError&) {
            return ReadBack::incomplete(pretty(t));
        }
        if (const auto* n = v.as<TNum>()) return ReadBack::number(n->value);
        const auto* name = v.as<TName>();
        if (!name) return ReadBack::incomplete(pretty(v));
        const std::string& h = name->id;
        if (const auto* arr = shape.as<butf::Array>()) {
            auto len = ask({Probe{chan(tname(h), Label::Kind::Len), 1}});
            if (!len[0]) return ReadBack::incomplete(h + ".len");
            const auto* n = (*len[0])[0].as<TNum>();
            if (!n || n->value < 0 || n->value > kMaxProbedLength) return ReadBack::incomplete(h + ".len");
            const auto count = static_cast<std::size_t>(n->value);
            std::vector<Probe> probes;
            for (std::size_t i = 0; i < count; ++i) probes.push_back({chan_index(tname(h), tnum(Integer(i))), 2});
            auto cells = ask(probes);
            std::vector<ReadBack> items;
            for (std::size_t i = 0; i < count; ++i) {
                if (!cells[i]) {
                    items.push_back(ReadBack::incomplete(h + "." + std::to_string(i)));
                    continue;
                }
                const Expr& sub = i < arr->elements.size() ? arr->elements[i] : butf::num(0);
                items.push_back(read((*cells[i])[1], sub));
            }
            return ReadBack::array(std::move(items));
        }
        if (const auto* tup = shape.as<butf::Tuple>()) {
            const std::size_t k = tup->elements.size();
            auto got = ask({Probe{chan(tname(h), Label::Kind::Tup), k}});
            if (!got[0]) return ReadBack::incomplete(h + ".tup");
            std::vector<ReadBack> items;
            for (std::size_t i = 0; i < k; ++i) items.push_back(read((*got[0])[i], tup->elements[i]));
            return ReadBack::tuple(std::move(items));
        }
        if (shape.is<butf::Lambda>() || shape.is<butf::Builtin>()) return ReadBack::function(h);
        return decode(cfg_, v);
    }

   private:
    struct Probe {
        ChannelId channel;
        std::size_t arity;
    };

    Config cfg_;
    std::uint64_t budget_;

    // Injects `c(x1..xk).p̄⟨x1..xk⟩` per probe and collects the answers.
    std::vector<std::optional<std::vector<Term>>> ask(const std::vector<Probe>& probes) {
        std::vector<std::string> answer;
        for (const auto& pr : probes) {
            answer.push_back("probe#" + std::to_string(cfg_.next_name++));
            std::vector<Pattern> params;
            std::vector<Term> vars;
            for (std::size_t i = 0; i < pr.arity; ++i) {
                params.push_back("x" + std::to_string(i));
                vars.push_back(tvar("x" + std::to_string(i)));
            }
            spawn(cfg_, act(recv(pr.channel, params), act(send(chan(tname(answer.back())), vars))), 0);
        }
        RunOptions ro;
        ro.budget = budget_;
        ro.engine.strict = false;
        cfg_ = run(cfg_, SchedulerPolicy::priority(), ro).final;
        std::map<std::string, std::vector<Term>> got;
        std::vector<Thread> kept;
        for (auto& t : cfg_.threads) {
            const auto* a = t.head.as<Act>();
            if (a && !t.replicated && a->action.kind == Action::Kind::Send && !a->action.channel.suffix) {
                const auto* base = a->action.channel.base.as<TName>();
                if (base && base->id.starts_with("probe#")) {
                    got[base->id] = a->action.args;
                    continue;
                }
            }
            kept.push_back(std::move(t));
        }
        cfg_.threads = std::move(kept);
        std::vector<std::optional<std::vector<Term>>> out;
        for (const auto& p : answer) {
            auto it = got.find(p);
            if (it == got.end())
                out.emplace_back();
            else
                out.emplace_back(it->second);
        }
        return out;
    }
};

ReadBack decode_rec(const Config& c, const Term& t, int depth) {
    if (const auto* n = t.as<TNum>()) return ReadBack::number(n->value);
    const auto* name = t.as<TName>();
    if (!name || depth > 64) return ReadBack::incomplete(pretty(t));
    const std::string& h = name->id;
    std::optional<Integer> len;
    std::optional<std::vector<Term>> tup;
    std::map<Integer, Term> cells;
    bool function = false;
    for (const auto& th : c.threads) {
        const auto* a = th.head.as<Act>();
        if (!a || !th.replicated) continue;
        const auto* base = a->action.channel.base.as<TName>();
        if (!base || base->id != h) continue;
        const auto& suffix = a->action.channel.suffix;
        if (a->action.kind == Action::Kind::Recv) {
            if (!suffix) function = true;
            continue;
        }
        if (!suffix) continue;
        switch (suffix->kind) {
            case Label::Kind::Len:
                if (const auto* n = a->action.args[0].as<TNum>()) len = n->value;
                break;
            case Label::Kind::Tup: tup = a->action.args; break;
            case Label::Kind::Index:
                if (const auto* i = suffix->index.as<TNum>(); i && a->action.args.size() == 2)
                    cells[i->value] = a->action.args[1];
                break;
            case Label::Kind::All: break;
        }
    }
    if (len) {
        std::vector<ReadBack> items;
        for (Integer i = 0; i < *len; ++i) {
            auto it = cells.find(i);
            items.push_back(it == cells.end() ? ReadBack::incomplete(h + "." + i.str())
                                              : decode_rec(c, it->second, depth + 1));
        }
        return ReadBack::array(std::move(items));
    }
    if (tup) {
        std::vector<ReadBack> items;
        for (const auto& x : *tup) items.push_back(decode_rec(c, x, depth + 1));
        return ReadBack::tuple(std::move(items));
    }
    if (function) return ReadBack::function(h);
    return ReadBack::incomplete(h);
}

}  // namespace

ReadBack read_back(const Config& c, const Term& result, const Expr& shape, std::uint64_t budget) {
    return Prober(c, budget).read(result, shape);
}

ReadBack decode(const Config& c, const Term& result) { return decode_rec(c, result, 0); }

RunReport simulate_to_result(const Expr& e, const SchedulerPolicy& policy, const SimOptions& opts, const Expr* shape) {
    RunReport rep;
    const Config start = normalize(translate::translate(e, opts.out, opts.translation));
    RunOptions ro;
    ro.budget = opts.budget;
    ro.engine.strict = opts.strict;
    ro.gc = opts.gc;
    rep.trace = run(start, policy, ro);
    rep.important_steps = rep.trace.work;
    if (auto res = result_term(rep.trace.final, opts.out))
        rep.readback = shape ? read_back(rep.trace.final, *res, *shape, opts.budget) : decode(rep.trace.final, *res);
    return rep;
}

ExploreReport explore_program(const Expr& e, const Expr& shape, const SimOptions& opts, std::size_t state_bound) {
    ExploreReport rep;
    rep.ran = true;
    ExploreOptions eo;
    eo.state_bound = state_bound;
    eo.engine.strict = opts.strict;
    eo.gc = opts.gc;
    const auto res = explore(normalize(translate::translate(e, opts.out, opts.translation)), eo);
    rep.states = res.states;
    rep.terminals = res.terminals.size();
    rep.bound_hit = res.bound_hit;
    bool all_equal = !res.terminals.empty();
    for (const auto& t : res.terminals) {
        auto term = result_term(t, opts.out);
        ReadBack rb = term ? read_back(t, *term, shape, opts.budget) : ReadBack::incomplete(opts.out);
        all_equal = all_equal && value_equal(shape, rb);
        const std::string text = pretty(rb);
        if (std::find(rep.values.begin(), rep.values.end(), text) == rep.values.end()) rep.values.push_back(text);
    }
    rep.agree = all_equal && rep.values.size() == 1;
    return rep;
}

CorrespondenceReport check_program(const Expr& e, const CheckOptions& opts) {
    CorrespondenceReport rep;
    rep.program = butf::pretty(e);
    rep.mode = opts.sim.translation.strict_bullets ? "strict" : "literal";
    butf::EvalOptions eo = opts.eval;
    eo.record_trace = true;
    const auto ev = butf::eval(e, eo);
    rep.butf_steps = ev.steps;
    if (ev.status != butf::EvalResult::Status::Value) {
        rep.status = ev.status == butf::EvalResult::Status::Stuck ? "stuck" : "diverged";
        rep.butf_value = ev.status == butf::EvalResult::Status::Stuck ? "stuck: " + ev.stuck_reason : "diverged";
        return rep;
    }
    rep.butf_value = butf::pretty(ev.value);

    std::map<std::string, std::uint64_t> dummy_cost;
    for (const auto& entry : ev.trace) {
        if (!opts.sim.translation.strict_bullets &&
            (entry.rule == butf::Rule::Size || entry.rule == butf::Rule::Iota))
            ++rep.size_iota_deficit;
        if (entry.rule != butf::Rule::Map) continue;
        const auto* ap = entry.redex.as<butf::App>();
        const auto* args = ap->arg.as<butf::Tuple>();
        const auto* fn = args->elements[0].as<butf::Lambda>();
        const Expr body = butf::substitute(fn->body, fn->param, butf::num(0));
        const std::string key = butf::pretty(body);
        auto it = dummy_cost.find(key);
        if (it == dummy_cost.end())
            it = dummy_cost.emplace(key, simulate_to_result(body, SchedulerPolicy::priority(), opts.sim).important_steps)
                     .first;
        rep.deviation += it->second;
        rep.deviations.push_back("map dummy call " + butf::pretty(args->elements[0]) + " 0: " +
                                 std::to_string(it->second) + " important");
    }
    rep.expected_important = rep.butf_steps - rep.size_iota_deficit;

    rep.value_match = true;
    rep.accounting_match = true;
    rep.status = "ok";
    std::vector<SchedulerPolicy> policies;
    for (unsigned s = 0; s < opts.seeds; ++s) policies.push_back(SchedulerPolicy::random(s));
    policies.push_back(SchedulerPolicy::priority());
    for (const auto& pol : policies) {
        const auto rr = simulate_to_result(e, pol, opts.sim, &ev.value);
        rep.important.push_back(rr.important_steps);
        rep.readbacks.push_back(rr.readback ? pretty(*rr.readback) : "<no result>");
        const bool ok = rr.readback && value_equal(ev.value, *rr.readback);
        rep.value_match = rep.value_match && ok;
        rep.accounting_match = rep.accounting_match && rr.important_steps >= rep.deviation &&
                               rr.important_steps - rep.deviation == rep.expected_important;
        if (rep.status == "ok") {
            if (rr.trace.status == Trace::Status::Timeout)
                rep.status = "timeout";
            else if (rr.trace.status == Trace::Status::Faulted)
                rep.status = "faulted";
            else if (!rr.readback)
                rep.status = "stuck-in-process";
        }
    }
    rep.seeds_run = opts.seeds;
    rep.important_min = *std::min_element(rep.important.begin(), rep.important.end());
    rep.important_max = *std::max_element(rep.important.begin(), rep.important.end());
    if (opts.explore) rep.exploration = explore_program(e, ev.value, opts.sim, opts.state_bound);
    return rep;
}

ValueBarbReport check_value_barb(const Expr& e, const SimOptions& opts, std::size_t state_bound) {
    ValueBarbReport rep;
    ExploreOptions eo;
    eo.state_bound = state_bound;
    eo.engine.strict = opts.strict;
    eo.engine.admin_only = true;
    const std::string out = opts.out;
    eo.stop = [&](const Config& c) { return has_barb(c, out, true); };
    const auto res = explore(normalize(translate::translate(e, opts.out, opts.translation)), eo);
    rep.states = res.states;
    for (const auto& t : res.terminals)
        if (has_barb(t, out, true)) {
            rep.verdict = BarbVerdict::Yes;
            return rep;
        }
    rep.verdict = res.bound_hit ? BarbVerdict::Unknown : BarbVerdict::No;
    return rep;
}

}  // namespace bpi::correspond
