#include "support.hpp"

#include "bpi/cost/cost.hpp"

#include <doctest.h>

using namespace bpi;
using namespace bpi::cost;
using butf::parse;

TEST_SUITE("cost.measure") {
    TEST_CASE("single programs") {
        auto r = measure(parse("5"));
        CHECK(r.work == 0);
        CHECK(r.span == 0);
        r = measure(parse("(\\x. x) 5"));
        CHECK(r.work == 1);
        CHECK(r.span == 1);
        r = measure(parse("[(\\x. x) 1, (\\x. x) 2]"));
        CHECK(r.work == 2);
        CHECK(r.span == 1);
        CHECK(r.consistent);
        CHECK(r.runs.size() == 3);
    }

    TEST_CASE("conditionals add the taken branch only") {
        const auto cond = measure(parse("(\\x. x) 1")).work;
        const auto a = measure(parse("(\\y. y) ((\\z. z) 2)")).work;
        const auto r = measure(parse("if (\\x. x) 1 then (\\y. y) ((\\z. z) 2) else (\\w. w) 3"));
        CHECK(r.work == 1 + cond + a);
    }

    TEST_CASE("span never exceeds work") {
        testing::ProgramGen gen(31);
        for (int i = 0; i < 120; ++i) {
            const auto e = gen.program(3);
            if (butf::eval(e).status != butf::EvalResult::Status::Value) continue;
            const auto r = measure(e, {.seeds = {0, 1}});
            for (const auto& run : r.runs) {
                CHECK(run.span <= run.work);
                if (run.work == 0) CHECK(run.span == 0);
            }
        }
    }
}

TEST_SUITE("cost.families") {
    TEST_CASE("family programs") {
        CHECK(butf::pretty(family_program(Family::ArrayOfApps, 2)) == "[(\\x. x) 1, (\\x. x) 2]");
        CHECK(butf::pretty(family_program(Family::MapOverIota, 3)) == "map (\\x. x, iota 3)");
        CHECK(butf::pretty(family_program(Family::NestedApps, 3)) == "(\\x1. (\\x2. (\\x3. x3) x2) x1) 0");
        CHECK(parse_family("nested-apps") == Family::NestedApps);
        CHECK_FALSE(parse_family("trees").has_value());
    }

    TEST_CASE("array of applications") {
        const auto t = scaling_experiment(Family::ArrayOfApps, {1, 2, 4, 8});
        for (const auto& row : t.rows) {
            CHECK(row.cost.work == row.n);
            CHECK(row.cost.span == 1);
        }
        CHECK(fit_check(t).ok());
    }

    TEST_CASE("nested applications") {
        const auto t = scaling_experiment(Family::NestedApps, {3});
        REQUIRE_FALSE(t.rows.empty());
        CHECK(t.rows.front().cost.work == 3);
        CHECK(t.rows.front().cost.span == 3);
    }

    TEST_CASE("map span does not depend on n") {
        const auto t = scaling_experiment(Family::MapOverIota, {1, 16});
        CHECK(fit_check(t).span_ok);
    }

    TEST_CASE("fit checks") {
        using P = std::vector<std::pair<std::size_t, std::uint64_t>>;
        CHECK(is_linear(P{{1, 1}, {2, 2}, {4, 4}}));
        CHECK(is_linear(P{{1, 5}, {2, 7}, {4, 11}}));
        CHECK_FALSE(is_linear(P{{1, 1}, {2, 2}, {4, 5}}));
        CHECK(is_constant(P{{1, 3}, {8, 3}}));
        CHECK_FALSE(is_constant(P{{1, 3}, {8, 4}}));
        ScalingTable t;
        t.family = Family::MapOverIota;
        t.rows = {{1, {0, 2, 2, 0, {}}}, {2, {0, 2, 3, 0, {}}}};
        CHECK_FALSE(fit_check(t).span_ok);
    }

    TEST_CASE("csv") {
        const auto t = scaling_experiment(Family::ArrayOfApps, {1}, {.seeds = {0}});
        CHECK(to_csv(t) == "family,n,seed,work,span,admin_steps\narray-of-apps,1,0,1,1," +
                               std::to_string(t.rows[0].cost.admin_steps) + "\n");
    }
}
