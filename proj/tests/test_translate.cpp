#include "support.hpp"

#include "bpi/epi/engine.hpp"
#include "bpi/translate/translate.hpp"

#include <doctest.h>

namespace butf = bpi::butf;
namespace epi = bpi::epi;
namespace testing = bpi::testing;
using bpi::Integer;
using namespace bpi::translate;
using butf::parse;
using epi::parse_process;

namespace {

std::size_t census(const butf::Expr& e, bool strict) {
    using namespace butf;
    std::size_t n = 0;
    if (const auto* a = e.as<App>()) {
        const auto* b = a->fun.as<Builtin>();
        const bool size_or_iota = b && (b->kind == BuiltinKind::Size || b->kind == BuiltinKind::Iota);
        n += (strict || !size_or_iota) ? 1 : 0;
        return n + census(a->fun, strict) + census(a->arg, strict);
    }
    if (const auto* i = e.as<If>())
        return 1 + census(i->cond, strict) + census(i->then_branch, strict) + census(i->else_branch, strict);
    if (const auto* x = e.as<Index>()) return 1 + census(x->target, strict) + census(x->index, strict);
    if (const auto* l = e.as<Lambda>()) return census(l->body, strict);
    if (const auto* a = e.as<Array>())
        for (const auto& x : a->elements) n += census(x, strict);
    if (const auto* t = e.as<Tuple>())
        for (const auto& x : t->elements) n += census(x, strict);
    return n;
}

// Sends on the free channels `got` and `done` left in the final configuration.
std::multiset<std::string> outputs(const epi::Config& c) {
    std::multiset<std::string> out;
    for (const auto& t : c.threads)
        if (const auto* a = t.head.as<epi::Act>(); a && a->action.kind == epi::Action::Kind::Send)
            out.insert(epi::pretty(a->action));
    return out;
}

}  // namespace

TEST_SUITE("translate.cases") {
    TEST_CASE("numbers and abstractions") {
        CHECK(epi::pretty(translate(parse("5"))) == "o<5>");
        CHECK(testing::alpha_equal(translate(parse("\\x. x")), parse_process("new f. (o<f> | !f(x, r).r<x>)")));
    }

    TEST_CASE("arrays are gathered into cells") {
        const auto want = parse_process(
            "new o1, o2, h. (o1<1> | o2<2> | o1(v1).o2(v2).("
            "!h.all(r).r<0, v1> | !h.0<0, v1> | (!h.all(r).r<1, v2> | !h.1<1, v2>) | !h.len<2> | o<h>))");
        CHECK(testing::alpha_equal(translate(parse("[1, 2]")), want));
    }

    TEST_CASE("indexing is guarded and bulleted") {
        const auto text = epi::pretty(translate(parse("[1, 2][0]")));
        CHECK(text.find("*[i1 >= 0] a1.i1(_, v3).o<v3>, 0") != std::string::npos);
    }

    TEST_CASE("application and conditionals") {
        CHECK(testing::alpha_equal(
            translate(parse("(\\x. x) 5")),
            parse_process("new o1, o2. (new f. (o1<f> | !f(x, r).r<x>) | o2<5> | o1(g).o2(v).*g<v, o>)")));
        CHECK(testing::alpha_equal(translate(parse("if 1 then 2 else 3")),
                                   parse_process("new o1. (o1<1> | o1(v).*[v != 0] o<2>, o<3>)")));
    }

    TEST_CASE("tuples") {
        CHECK(testing::alpha_equal(translate(parse("(7,)")), parse_process("new o1, h. (o1<7> | o1(v).(!h.tup<v> | o<h>))")));
        CHECK(testing::alpha_equal(translate(parse("()")), parse_process("new h. (!h.tup<> | o<h>)")));
    }

    TEST_CASE("arithmetic") {
        CHECK(testing::alpha_equal(
            translate(parse("(+)")), parse_process("new f. (o<f> | !f(x, r).x.tup(a, b).r<a + b>)")));
        const auto text = epi::pretty(translate(parse("6 / 3")));
        CHECK(text.find("*x1.tup(n1, n2).o<n1 / n2>") != std::string::npos);
    }

    TEST_CASE("size bullet depends on the mode") {
        const auto strict = epi::pretty(translate(parse("size [1]")));
        CHECK(strict.find("*x1.len(n1).o<n1>") != std::string::npos);
        const auto literal = epi::pretty(translate(parse("size [1]"), "o", {.strict_bullets = false}));
        CHECK(literal.find("*") == std::string::npos);
    }

    TEST_CASE("header records the options") {
        CHECK(options_header({}) == "-- translation: strict_bullets=on parallel_repeat=off");
        CHECK(options_header({.strict_bullets = false, .parallel_repeat = true}) ==
              "-- translation: strict_bullets=off parallel_repeat=on");
    }

    TEST_CASE("translation output is closed") {
        testing::ProgramGen gen(41, true);
        for (int i = 0; i < 300; ++i) {
            const auto e = gen.wild(4);
            const auto p = translate(e, "o");
            CHECK(epi::free_vars(p).empty());
            const auto fn = epi::free_names(p);
            CHECK(std::all_of(fn.begin(), fn.end(), [](const std::string& n) { return n == "o"; }));
        }
    }
}

TEST_SUITE("translate.names") {
    TEST_CASE("fresh names carry their role") {
        FreshNames fresh;
        CHECK(fresh.name(Role::Output) == "o1");
        CHECK(fresh.name(Role::Output) == "o2");
        CHECK(fresh.name(Role::Handle) == "h1");
        FreshNames avoiding({"o1", "h1"});
        CHECK(avoiding.name(Role::Output) == "o2");
        CHECK(avoiding.name(Role::Handle) == "h2");
    }

    TEST_CASE("roles of runtime names") {
        CHECK(role_of("o") == Role::Output);
        CHECK(role_of("o12") == Role::Output);
        CHECK(role_of("h2#5") == Role::Handle);
        CHECK(role_of("vals4") == Role::Collection);
        CHECK(role_of("d3") == Role::Signal);
        CHECK(role_of("f5") == Role::Function);
        CHECK(role_of("c7") == Role::Counter);
        CHECK_FALSE(role_of("zz").has_value());
    }
}

TEST_SUITE("translate.blocks") {
    TEST_CASE("cell") {
        CHECK(epi::pretty(cell(epi::tname("h"), epi::tnum(0), epi::tnum(5))) == "!h.all(r).r<0, 5> | !h.0<0, 5>");
        auto c = epi::normalize(epi::par(cell(epi::tname("h"), epi::tnum(1), epi::tname("k")),
                                         parse_process("h.1(i, x).got<i, x>")));
        const auto tr = epi::run(c, epi::SchedulerPolicy::priority());
        CHECK(outputs(tr.final).count("got<1, k>") == 1);
        CHECK(tr.final.threads.size() == 3);
    }

    TEST_CASE("repeat emits each index once, then signals") {
        const auto listen = parse_process("!r(i, v).got<i, v> | d().done<>");
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto c = epi::normalize(epi::par(repeat(epi::tnum(3), epi::tname("r"), epi::tname("d")), listen));
            const auto tr = epi::run(c, epi::SchedulerPolicy::random(seed));
            const auto out = outputs(tr.final);
            CHECK(out == std::multiset<std::string>{"got<2, 2>", "got<1, 1>", "got<0, 0>", "done<>"});
        }
        auto c = epi::normalize(epi::par(repeat(epi::tnum(0), epi::tname("r"), epi::tname("d")), listen));
        CHECK(outputs(epi::run(c, epi::SchedulerPolicy::priority()).final) == std::multiset<std::string>{"done<>"});
    }

    TEST_CASE("the parallel repeat also emits minus one") {
        const auto listen = parse_process("!r(i, v).got<i, v> | d().done<>");
        auto c = epi::normalize(
            epi::par(repeat(epi::tnum(1), epi::tname("r"), epi::tname("d"), {.parallel_repeat = true}), listen));
        const auto out = outputs(epi::run(c, epi::SchedulerPolicy::priority()).final);
        CHECK(out.count("got<0, 0>") == 1);
        CHECK(out.count("got<-1, -1>") == 1);
    }
}

TEST_SUITE("translate.well_behaved") {
    TEST_CASE("membership examples") {
        CHECK(well_behaved(epi::nil()));
        CHECK_FALSE(well_behaved(parse_process("o<o>")));
        CHECK(well_behaved(translate(parse("map ((\\x. x + 1), iota 3)"))));
    }

    TEST_CASE("generated programs translate into the grammar") {
        testing::ProgramGen typed(8), wild(9, true);
        for (int i = 0; i < 400; ++i) {
            const auto e = i % 2 ? typed.program(4) : wild.wild(4);
            const auto w = well_behaved(translate(e));
            INFO(butf::pretty(e), " at ", w.path);
            CHECK(w.ok);
        }
    }

    TEST_CASE("configurations along corpus runs stay in the grammar") {
        for (const auto& p : testing::load_corpus()) {
            if (p.expect_stuck) continue;
            bool ok = true;
            std::string where;
            epi::RunOptions ro;
            ro.observer = [&](const epi::Config& c, const epi::Step*) {
                if (!ok) return;
                const auto w = well_behaved(c);
                if (!w.ok) ok = false, where = w.path;
            };
            epi::run(epi::normalize(translate(p.expr)), epi::SchedulerPolicy::random(4), ro);
            CAPTURE(p.name);
            INFO(where);
            CHECK(ok);
        }
    }
}

TEST_SUITE("translate.properties") {
    TEST_CASE("bullet census") {
        testing::ProgramGen gen(12, true);
        for (int i = 0; i < 500; ++i) {
            const auto e = gen.wild(4);
            for (bool strict : {true, false}) {
                const TranslationOptions opts{.strict_bullets = strict};
                INFO(butf::pretty(e));
                CHECK(epi::count_bullets(translate(e, "o", opts)) == census(e, strict));
                CHECK(expected_bullets(e, opts) == census(e, strict));
            }
        }
    }

    TEST_CASE("substituting a numeral commutes with translation") {
        testing::ProgramGen gen(13, true);
        for (int i = 0; i < 400; ++i) {
            const auto e = gen.wild(4, {"x"});
            const Integer n = static_cast<long>(i % 7) - 2;
            epi::Substitution s;
            s.vars["x"] = epi::tnum(n);
            const auto lhs = epi::subst(translate(e), s);
            const auto rhs = translate(butf::substitute(e, "x", butf::num(n)));
            INFO(butf::pretty(e));
            CHECK(testing::alpha_equal(lhs, rhs));
        }
    }

    TEST_CASE("values reduce to their result without important steps") {
        for (const char* text : {"5", "[1, (2, 3)]", "\\x. (\\y. y) x", "()", "[[], [1]]"}) {
            const auto tr = epi::run(epi::normalize(translate(parse(text))), epi::SchedulerPolicy::random(2));
            CAPTURE(text);
            CHECK(tr.work == 0);
            CHECK(epi::has_barb(tr.final, "o", true));
        }
    }
}
