#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rulejoin/combine.hpp"
#include "rulejoin/logic.hpp"

using namespace rulejoin;
using namespace rulejoin::testing;

namespace {

RandomRules zendo_like() {
    RandomRules g;
    g.preds = {Predicate("piece", 2), Predicate("red", 1), Predicate("blue", 1), Predicate("contact", 2)};
    g.head = Predicate("zendo", 1);
    return g;
}

// Renames variables by a random permutation and shuffles the body.
Rule scramble(const Rule& r, std::mt19937_64& rng) {
    std::vector<std::uint32_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin() + 1, perm.end(), rng);  // keep the head variable
    auto ren = [&](const Atom& a) {
        Atom b = a;
        for (auto& t : b.args)
            if (t.is_var()) t = Term::var(perm[t.value]);
        return b;
    };
    Rule out{ren(r.head), {}};
    for (const auto& a : r.body) out.body.push_back(ren(a));
    std::shuffle(out.body.begin(), out.body.end(), rng);
    return out;
}

} // namespace

TEST(Canonical, RenamesAndSorts) {
    Rule a = canonicalize(rule("zendo(S) :- blue(B), piece(S,B)."));
    Rule b = canonicalize(rule("zendo(V) :- piece(V,W), blue(W)."));
    EXPECT_EQ(a, b);
    EXPECT_EQ(to_string(a), "zendo(A) :- blue(B), piece(A,B).");
}

TEST(Canonical, Idempotent) {
    std::mt19937_64 rng(11);
    auto g = zendo_like();
    for (int i = 0; i < 1000; ++i) {
        Rule c = canonicalize(g.draw(rng));
        EXPECT_EQ(canonicalize(c), c) << to_string(c);
    }
}

TEST(Canonical, AlphaEquivalentRulesAgree) {
    std::mt19937_64 rng(12);
    auto g = zendo_like();
    for (int i = 0; i < 500; ++i) {
        Rule r = g.draw(rng);
        Rule s = scramble(r, rng);
        ASSERT_TRUE(oracle::alpha_equivalent(r, s));
        EXPECT_EQ(canonicalize(r), canonicalize(s)) << to_string(r) << " vs " << to_string(s);
    }
}

TEST(Canonical, EqualFormsMeanAlphaEquivalent) {
    std::mt19937_64 rng(13);
    RandomRules g;
    g.preds = {Predicate("p", 2), Predicate("q", 1)};
    g.max_vars = 3;
    g.max_body = 3;
    int equal = 0;
    for (int i = 0; i < 3000; ++i) {
        Rule a = g.draw(rng), b = g.draw(rng);
        // duplicate body atoms are dropped by canonicalisation; compare as sets
        auto dedup = [](Rule r) {
            std::sort(r.body.begin(), r.body.end());
            r.body.erase(std::unique(r.body.begin(), r.body.end()), r.body.end());
            return r;
        };
        bool same = canonicalize(a) == canonicalize(b);
        EXPECT_EQ(same, oracle::alpha_equivalent(dedup(a), dedup(b))) << to_string(a) << " / " << to_string(b);
        equal += same;
    }
    EXPECT_GT(equal, 0);
}

TEST(Cost, IntroRuleOfSizeSeven) {
    Program h2 = program("zendo(S) :- piece(S,B), blue(B), piece(S,R), red(R), piece(S,G), green(G).");
    EXPECT_EQ(program_cost(h2), 7);
    EXPECT_EQ(rule_cost(rule("f(A) :- p(A).")), 2);
}

TEST(Cost, StringListingWithFivePairs) {
    std::vector<Program> members;
    for (const char* c : {"a", "b", "c", "d", "e"})
        members.push_back(program(std::string("f(A) :- head(A,B), is_") + c + "(B).\nf(A) :- tail(A,B), f(B).\n"));
    Program reified = reify_conjunction(members, Predicate("f", 1));
    EXPECT_EQ(reified.rules.size(), 11u);
    EXPECT_EQ(program_cost(reified), 36);
}

TEST(Subsumption, Basics) {
    Rule g = rule("f(A) :- p(A,B).");
    Rule h = rule("f(A) :- p(A,B), q(B).");
    EXPECT_TRUE(theta_subsumes(g, g));
    EXPECT_TRUE(theta_subsumes(g, h));
    EXPECT_FALSE(theta_subsumes(h, g));
    EXPECT_TRUE(theta_subsumes(Program::make({g}), Program::make({h})));
}

TEST(Subsumption, MatchesExhaustiveSearch) {
    std::mt19937_64 rng(14);
    RandomRules g;
    g.preds = {Predicate("p", 2), Predicate("q", 1)};
    g.max_vars = 3;
    g.max_body = 3;
    int positives = 0;
    for (int i = 0; i < 3000; ++i) {
        Rule a = g.draw(rng), b = g.draw(rng);
        bool expect = oracle::subsumes(a, b);
        EXPECT_EQ(theta_subsumes(a, b), expect) << to_string(a) << " / " << to_string(b);
        positives += expect;
    }
    EXPECT_GT(positives, 100);
}

TEST(Splittable, WorkedRules) {
    EXPECT_TRUE(is_splittable_rule(rule("zendo(S) :- piece(S,R), red(R), piece(S,B), blue(B).")));
    EXPECT_FALSE(is_splittable_rule(rule("zendo(S) :- piece(S,R), red(R), piece(S,B), blue(B), contact(R,B).")));
    EXPECT_FALSE(is_splittable_rule(rule("zendo(S) :- piece(S,R).")));
}

TEST(Splittable, MatchesUnionFind) {
    std::mt19937_64 rng(15);
    auto g = zendo_like();
    g.max_body = 6;
    for (int i = 0; i < 2000; ++i) {
        Rule r = canonicalize(g.draw(rng));
        EXPECT_EQ(is_splittable_rule(r), oracle::splittable(r)) << to_string(r);
    }
}

TEST(Splittable, Programs) {
    Program p4 = program("f(S) :- head(S,c).\nf(S) :- tail(S,T), f(T).\n");
    EXPECT_FALSE(is_splittable_program(p4));
    EXPECT_TRUE(is_splittable_program(program("zendo(S) :- piece(S,R), red(R), piece(S,B), blue(B).")));
    EXPECT_FALSE(is_splittable_program(program("f(A) :- head(A,c).")));
}

TEST(Split, FactorsOfListRule) {
    Rule r = rule("f(A) :- head(A,1), tail(A,B), head(B,3).");
    std::vector<Rule> parts = split_rule(r);
    std::vector<Rule> expect = {canonicalize(rule("f(A) :- head(A,1).")),
                                canonicalize(rule("f(A) :- tail(A,B), head(B,3)."))};
    for (auto& p : parts) p = canonicalize(p);
    std::sort(parts.begin(), parts.end());
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(parts, expect);

    Rule solid = rule("f(A) :- tail(A,B), head(B,3).");
    ASSERT_EQ(split_rule(solid).size(), 1u);
    EXPECT_EQ(canonicalize(split_rule(solid)[0]), canonicalize(solid));
}

TEST(Separable, Classification) {
    Program p4 = program("f(S) :- head(S,c).\nf(S) :- tail(S,T), f(T).\n");
    EXPECT_FALSE(is_separable(p4));
    EXPECT_TRUE(is_recursive(p4));
    EXPECT_FALSE(is_separable(program("f(A) :- p(A).")));
    EXPECT_TRUE(is_separable(program("f(A) :- p(A).\nf(A) :- q(A).\n")));
    EXPECT_FALSE(is_recursive(program("f(A) :- p(A).\nf(A) :- q(A).\n")));
}
