#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rulejoin/combine.hpp"

using namespace rulejoin;
using namespace rulejoin::testing;

namespace {

Atom fact(const std::string& p, const std::string& a) { return Atom(Predicate(p, 1), {Term::constant(a)}); }

Bitset bits(std::size_t n, std::initializer_list<std::size_t> on) {
    Bitset b(n);
    for (auto i : on) b.set(i);
    return b;
}

} // namespace

TEST(Reify, TwoZendoMembers) {
    Program blue = program("zendo(S) :- piece(S,B), blue(B).");
    Program red = program("zendo(S) :- piece(S,R), red(R).");
    Program sigma = reify_conjunction({blue, red}, Predicate("zendo", 1));
    Program expect = program(
        "zendo(A) :- zendo_1(A), zendo_2(A).\n"
        "zendo_1(S) :- piece(S,B), blue(B).\n"
        "zendo_2(S) :- piece(S,R), red(R).\n");
    EXPECT_EQ(sigma, expect);
    EXPECT_EQ(sigma.rules.size(), 3u);
}

TEST(Reify, SingletonKeepsModel) {
    TaskSpec t = load("intro_zendo");
    Program blue = program("zendo(S) :- piece(S,B), blue(B).");
    Program sigma = reify_conjunction({blue}, Predicate("zendo", 1));
    EXPECT_EQ(sigma.rules.size(), 2u);
    Predicate z("zendo", 1);
    EXPECT_EQ(restricted_model(least_model(sigma, t.bk), z), restricted_model(least_model(blue, t.bk), z));
}

TEST(Reify, RecursiveMembersRewired) {
    TaskSpec t = parse_task_text("", "pos(f([1,2])).\npos(f([2,3,1])).\nneg(f([1,3])).\nneg(f([3])).\n",
                                 "head_pred(f,1).\nbody_pred(head,2).\nbody_pred(tail,2).\n");
    Program c1 = program("f(S) :- head(S,1).\nf(S) :- tail(S,T), f(T).\n");
    Program c2 = program("f(S) :- head(S,2).\nf(S) :- tail(S,T), f(T).\n");
    Program sigma = reify_conjunction({c1, c2}, Predicate("f", 1));
    for (const auto& r : sigma.rules)
        if (r.head.pred != Predicate("f", 1))
            for (const auto& a : r.body) EXPECT_NE(a.pred, Predicate("f", 1)) << to_string(r);
    CoverageRecord got = coverage(sigma, t.bk, t.pos, t.neg);
    CoverageRecord expect = oracle::conjunction_coverage({c1, c2}, t.bk, t.pos, t.neg);
    EXPECT_EQ(got, expect);
    EXPECT_EQ(got.tp, 2u);
    EXPECT_EQ(got.fp, 0u);
}

TEST(Combine, JoinExampleConjunction) {
    TaskSpec t = load("join_example");
    auto p = programs(read_file(data_dir() / "join_example" / "programs.pl"));
    CoverageTester tester(t.bk, t.pos, t.neg);
    Conjunction c1;
    c1.members = {p[2], p[3], p[4]};
    std::sort(c1.members.begin(), c1.members.end());
    c1.pos = Bitset(2, true);
    c1.cost = 13;
    auto res = combine({CombineUnit::from_conjunction(c1)}, 100, tester, Predicate("f", 1));
    ASSERT_TRUE(res);
    EXPECT_EQ(res->assembly.cost, program_cost(p[2]) + program_cost(p[3]) + program_cost(p[4]));
    EXPECT_EQ(res->assembly.cost, 13);
    CoverageRecord cov = tester.test(res->assembly.program);
    EXPECT_EQ(cov.fn, 0u);
    EXPECT_EQ(cov.fp, 0u);
    EXPECT_EQ(res->assembly.reified_size, program_cost(res->assembly.program));
    // below the cost of the only unit nothing is found
    EXPECT_FALSE(combine({CombineUnit::from_conjunction(c1)}, 12, tester, Predicate("f", 1)));
}

TEST(Combine, PicksCheaperPair) {
    Background bk;
    bk.facts.add(fact("a", "e1"));
    bk.facts.add(fact("b", "e2"));
    bk.facts.add(fact("c", "e1"));
    bk.facts.add(fact("c", "e2"));
    std::vector<Atom> pos = {fact("f", "e1"), fact("f", "e2")};
    std::vector<Atom> neg = {fact("f", "n1")};
    CoverageTester tester(bk, pos, neg);
    std::vector<CombineUnit> units = {
        CombineUnit::from_program(program("f(X) :- a(X)."), bits(2, {0})),
        CombineUnit::from_program(program("f(X) :- b(X)."), bits(2, {1})),
        CombineUnit::from_program(program("f(X) :- c(X)."), bits(2, {0, 1}))};
    units[0].cost = 3;
    units[1].cost = 3;
    units[2].cost = 7;
    auto res = combine(units, 100, tester, Predicate("f", 1));
    ASSERT_TRUE(res);
    EXPECT_EQ(res->selection, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(res->assembly.cost, 6);

    auto single = combine({units[2]}, 100, tester, Predicate("f", 1));
    ASSERT_TRUE(single);
    EXPECT_EQ(single->selection, (std::vector<std::size_t>{0}));
}

TEST(Combine, AuxNamesAvoidBackground) {
    Background bk;
    bk.facts.add(fact("f_1", "x"));
    bk.facts.add(fact("p", "e1"));
    bk.facts.add(fact("q", "e1"));
    CoverageTester tester(bk, {fact("f", "e1")}, {});
    Conjunction c;
    c.members = {program("f(X) :- p(X)."), program("f(X) :- q(X).")};
    std::sort(c.members.begin(), c.members.end());
    c.pos = Bitset(1, true);
    c.cost = 4;
    auto res = combine({CombineUnit::from_conjunction(c)}, 10, tester, Predicate("f", 1));
    ASSERT_TRUE(res);
    for (const auto& r : res->assembly.program.rules) EXPECT_NE(r.head.pred, Predicate("f_1", 1));
}

TEST(Combine, MatchesExhaustiveSubsets) {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 150; ++i) {
        std::size_t n_ex = 2 + rng() % 4;
        Background bk;
        std::vector<Atom> pos, neg;
        for (std::size_t e = 0; e < n_ex; ++e) pos.push_back(fact("f", "e" + std::to_string(e)));
        neg.push_back(fact("f", "n0"));
        std::size_t n_units = 1 + rng() % 6;
        std::vector<CombineUnit> units;
        for (std::size_t u = 0; u < n_units; ++u) {
            std::string pred = "u" + std::to_string(u);
            Bitset b(n_ex);
            for (std::size_t e = 0; e < n_ex; ++e)
                if (rng() % 2) {
                    b.set(e);
                    bk.facts.add(fact(pred, "e" + std::to_string(e)));
                }
            if (b.none()) {
                b.set(0);
                bk.facts.add(fact(pred, "e0"));
            }
            units.push_back(CombineUnit::from_program(program("f(X) :- " + pred + "(X)."), b));
            units.back().cost = 2 + static_cast<int>(rng() % 6);
        }
        int maxsize = 4 + static_cast<int>(rng() % 20);
        int best = -1;
        for (std::uint64_t m = 1; m < (std::uint64_t{1} << n_units); ++m) {
            Bitset cov(n_ex);
            int cost = 0;
            for (std::size_t u = 0; u < n_units; ++u)
                if ((m >> u) & 1U) {
                    cov |= units[u].pos;
                    cost += units[u].cost;
                }
            if (cov.all() && cost <= maxsize && (best < 0 || cost < best)) best = cost;
        }
        CoverageTester tester(bk, pos, neg);
        auto res = combine(units, maxsize, tester, Predicate("f", 1));
        ASSERT_EQ(res.has_value(), best >= 0) << "case " << i;
        if (res) EXPECT_EQ(res->assembly.cost, best) << "case " << i;
    }
}
