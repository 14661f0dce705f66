#include "bpi/cost/cost.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace bpi::cost {

using butf::Expr;

CostReport measure(const Expr& e, const MeasureOptions& opts) {
    CostReport rep;
    const epi::Config start = epi::normalize(translate::translate(e, "o", opts.translation));
    epi::RunOptions ro;
    ro.budget = opts.budget;
    for (auto seed : opts.seeds) {
        const auto tr = epi::run(start, epi::SchedulerPolicy::random(seed), ro);
        RunCost rc{seed, tr.work, tr.span, tr.admin_steps, tr.status};
        if (!rep.runs.empty() && (rc.work != rep.runs.front().work || rc.span != rep.runs.front().span))
            rep.consistent = false;
        rep.timed_out = rep.timed_out || tr.status == epi::Trace::Status::Timeout;
        rep.work = std::max(rep.work, rc.work);
        rep.span = std::max(rep.span, rc.span);
        rep.admin_steps = std::max(rep.admin_steps, rc.admin_steps);
        rep.runs.push_back(rc);
    }
    return rep;
}

std::string_view family_name(Family f) {
    switch (f) {
        case Family::ArrayOfApps: return "array-of-apps";
        case Family::MapOverIota: return "map-over-iota";
        case Family::NestedApps: return "nested-apps";
    }
    return "?";
}

std::optional<Family> parse_family(std::string_view name) {
    for (Family f : {Family::ArrayOfApps, Family::MapOverIota, Family::NestedApps})
        if (name == family_name(f)) return f;
    return std::nullopt;
}

Expr family_program(Family f, std::size_t n, const Expr& body) {
    using namespace butf;
    switch (f) {
        case Family::ArrayOfApps: {
            std::vector<Expr> elems;
            for (std::size_t i = 1; i <= n; ++i) elems.push_back(app(lambda("x", var("x")), num(Integer(i))));
            return array(std::move(elems));
        }
        case Family::MapOverIota:
            return app(builtin(BuiltinKind::Map), tuple({body, app(builtin(BuiltinKind::Iota), num(Integer(n)))}));
        case Family::NestedApps: {
            auto x = [](std::size_t i) { return "x" + std::to_string(i); };
            Expr inner = var(x(n));
            for (std::size_t j = n; j >= 1; --j) {
                Expr arg = j == 1 ? num(0) : var(x(j - 1));
                inner = app(lambda(x(j), inner), arg);
            }
            return inner;
        }
    }
    throw std::logic_error("unknown family");
}

ScalingTable scaling_experiment(Family f, const std::vector<std::size_t>& sizes, const MeasureOptions& opts,
                                const Expr& body) {
    ScalingTable t;
    t.family = f;
    switch (f) {
        case Family::ArrayOfApps: t.predicted = "work linear in n, span constant"; break;
        case Family::MapOverIota: t.predicted = "work affine in n, span constant"; break;
        case Family::NestedApps: t.predicted = "work = span = k"; break;
    }
    std::vector<std::size_t> ns = sizes;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    for (auto n : ns) {
        const auto rep = measure(family_program(f, n, body), opts);
        if (rep.timed_out) {
            t.dropped.push_back(n);
            continue;
        }
        for (const auto& rc : rep.runs) t.rows.push_back(ScalingRow{n, rc});
    }
    return t;
}

namespace {

using Points = std::vector<std::pair<std::size_t, std::uint64_t>>;

// Worst case over seeds for each n.
Points collect(const ScalingTable& t, std::uint64_t RunCost::*field) {
    std::map<std::size_t, std::uint64_t> by_n;
    for (const auto& r : t.rows) by_n[r.n] = std::max(by_n[r.n], r.cost.*field);
    return Points(by_n.begin(), by_n.end());
}

std::string describe(const Points& pts) {
    std::ostringstream os;
    for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << pts[i].first << ':' << pts[i].second;
    return os.str();
}

bool equals_n(const Points& pts) {
    return std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second == p.first; });
}

}  // namespace

bool is_linear(const Points& pts) {
    if (pts.size() < 2) return true;
    using I = Integer;
    const I dx0 = I(pts[1].first) - I(pts[0].first);
    const I dy0 = I(pts[1].second) - I(pts[0].second);
    for (std::size_t i = 2; i < pts.size(); ++i) {
        const I dx = I(pts[i].first) - I(pts[i - 1].first);
        const I dy = I(pts[i].second) - I(pts[i - 1].second);
        if (dy * dx0 != dy0 * dx) return false;
    }
    return true;
}

bool is_constant(const Points& pts, std::uint64_t slack) {
    if (pts.empty()) return true;
    auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(),
                                        [](const auto& a, const auto& b) { return a.second < b.second; });
    return hi->second - lo->second <= slack;
}

FitVerdict fit_check(const ScalingTable& t, std::uint64_t span_slack) {
    FitVerdict v;
    const Points work = collect(t, &RunCost::work);
    const Points span = collect(t, &RunCost::span);
    v.work_detail = describe(work);
    v.span_detail = describe(span);
    v.work_ok = !work.empty() && is_linear(work);
    switch (t.family) {
        case Family::ArrayOfApps:
        case Family::MapOverIota: v.span_ok = !span.empty() && is_constant(span, span_slack); break;
        case Family::NestedApps:
            v.work_ok = v.work_ok && equals_n(work);
            v.span_ok = !span.empty() && equals_n(span);
            break;
    }
    return v;
}

std::string to_csv(const ScalingTable& t, bool header) {
    std::ostringstream os;
    if (header) os << "family,n,seed,work,span,admin_steps\n";
    for (const auto& r : t.rows)
        os << family_name(t.family) << ',' << r.n << ',' << r.cost.seed << ',' << r.cost.work << ',' << r.cost.span
           << ',' << r.cost.admin_steps << '\n';
    return os.str();
}

}  // namespace bpi::cost
