#include <gtest/gtest.h>

#include <filesystem>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rulejoin/task.hpp"
#include "rulejoin/taskgen.hpp"

using namespace rulejoin;
using namespace rulejoin::testing;

namespace {

const char* kListBias = "head_pred(f,1).\nbody_pred(head,2).\nbody_pred(tail,2).\n";

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("rulejoin_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::vector<Atom> all_of(const GeneratedTask& g) {
    std::vector<Atom> v = g.test_pos;
    v.insert(v.end(), g.test_neg.begin(), g.test_neg.end());
    v.insert(v.end(), g.train.pos.begin(), g.train.pos.end());
    v.insert(v.end(), g.train.neg.begin(), g.train.neg.end());
    return v;
}

} // namespace

TEST(Parse, ListSugar) {
    TaskSpec t = parse_task_text("", "pos(f([a,b,c,d])).\n", kListBias);
    ASSERT_EQ(t.pos.size(), 1u);
    EXPECT_TRUE(t.neg.empty());
    EXPECT_EQ(t.pos[0], Atom(Predicate("f", 1), {Term::constant("[a,b,c,d]")}));
    auto c = [](const char* s) { return Term::constant(s); };
    EXPECT_TRUE(t.bk.facts.contains(Atom(Predicate("head", 2), {c("[a,b,c,d]"), c("a")})));
    EXPECT_TRUE(t.bk.facts.contains(Atom(Predicate("tail", 2), {c("[a,b,c,d]"), c("[b,c,d]")})));
    EXPECT_TRUE(t.bk.facts.contains(Atom(Predicate("head", 2), {c("[d]"), c("d")})));
    EXPECT_TRUE(t.bk.facts.contains(Atom(Predicate("tail", 2), {c("[d]"), c("[]")})));
}

TEST(Parse, EmptyNegativesAreValid) {
    TaskSpec t = parse_task_text("p(a).\n", "pos(f(a)).\n", "head_pred(f,1).\nbody_pred(p,1).\n");
    EXPECT_TRUE(t.neg.empty());
    EXPECT_NO_THROW(t.validate());
}

TEST(Parse, RejectsTargetInBackgroundBody) {
    EXPECT_ANY_THROW(parse_task_text("friend(a,b).\nfamous(b).\nhappy(A) :- friend(A,B), famous(B).\n",
                                     "pos(happy(a)).\n",
                                     "head_pred(happy,1).\nbody_pred(friend,2).\nbody_pred(famous,1).\n")
                         .validate());
    EXPECT_ANY_THROW(parse_task_text("friend(a,b).\nliked(A) :- friend(A,B), happy(B).\n", "pos(happy(a)).\n",
                                     "head_pred(happy,1).\nbody_pred(friend,2).\n")
                         .validate());
}

TEST(Parse, Errors) {
    try {
        parse_examples("pos(f(a)).\npos(f(a) neg(f(b)).\n");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_GT(e.column(), 1);
    }
    EXPECT_THROW(parse_examples("pos(f(X)).\n"), ParseError);
    EXPECT_THROW(parse_examples("maybe(f(a)).\n"), ParseError);
    EXPECT_ANY_THROW(parse_task_text("p(a).\np(a,b).\n", "pos(f(a)).\n", "head_pred(f,1).\nbody_pred(p,1).\n"));
    EXPECT_ANY_THROW(parse_task_text("p(a).\n", "pos(g(a)).\n", "head_pred(f,1).\nbody_pred(p,1).\n"));
    EXPECT_THROW(parse_bias("body_pred(p,1).\n"), ParseError);
}

TEST(Parse, CommentsAndDuplicates) {
    TaskSpec t = parse_task_text("% facts\np(a). % trailing\np(a).\n", "pos(f(a)).\n",
                                 "head_pred(f,1).\nbody_pred(p,1).\nconstant(p,0,a).\n");
    EXPECT_EQ(t.bk.facts.size(), 1u);
    ASSERT_EQ(t.bias.constants.size(), 1u);
    EXPECT_EQ(t.bias.constants.begin()->first.second, 0);
}

TEST(RoundTrip, GeneratedTasks) {
    for (const char* family : {"zendo", "string"}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            int k = std::string(family) == "zendo" ? 9 : 15;
            GeneratedTask g = gen_task(family, k, 20, 20, seed);
            auto dir = scratch(std::string(family) + std::to_string(seed));
            write_generated(dir, g);
            TaskSpec back = parse_task(dir / "bk.pl", dir / "exs.pl", dir / "bias.pl");
            EXPECT_EQ(facts_of(back.bk.facts), facts_of(g.train.bk.facts));
            EXPECT_EQ(back.pos, g.train.pos);
            EXPECT_EQ(back.neg, g.train.neg);
            EXPECT_EQ(print_bias(back.bias), print_bias(g.train.bias));
            EXPECT_EQ(print_background(back.bk), print_background(g.train.bk));
            Program planted = parse_program(read_file(dir / "planted.pl"), g.train.bias.head);
            EXPECT_EQ(planted, g.planted);
        }
    }
}

TEST(Generate, SameSeedSameFiles) {
    auto a = scratch("det_a"), b = scratch("det_b");
    write_generated(a, gen_task("string", 22, 30, 30, 9));
    write_generated(b, gen_task("string", 22, 30, 30, 9));
    for (const char* f : {"bk.pl", "exs.pl", "bias.pl", "test_exs.pl", "planted.pl"})
        EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
    auto c = scratch("det_c");
    write_generated(c, gen_task("string", 22, 30, 30, 10));
    EXPECT_NE(read_file(a / "exs.pl"), read_file(c / "exs.pl"));
}

TEST(Generate, InvalidSizes) {
    EXPECT_THROW(gen_task("zendo", 10, 20, 20, 1), std::invalid_argument);
    EXPECT_THROW(gen_task("string", 9, 20, 20, 1), std::invalid_argument);
    EXPECT_THROW(gen_task("chess", 9, 20, 20, 1), std::invalid_argument);
}

TEST(Generate, ZendoThreeColoursIsIntroRule) {
    GeneratedTask g = gen_zendo(9, 20, 40, 5);
    EXPECT_EQ(g.planted_cost, 9);
    ASSERT_EQ(g.planted_members.size(), 3u);
    // the single rule requiring the same three colours: cost 7, same extension
    Rule single{Atom(Predicate("zendo", 1), {Term::var(0)}), {}};
    std::uint32_t v = 1;
    for (const auto& m : g.planted_members) {
        const Rule& r = m.rules.at(0);
        for (const auto& a : r.body) {
            if (a.pred == Predicate("piece", 2)) single.body.push_back(Atom(a.pred, {Term::var(0), Term::var(v)}));
            else single.body.push_back(Atom(a.pred, {Term::var(v)}));
        }
        ++v;
    }
    Program h2 = Program::make({single});
    EXPECT_EQ(program_cost(h2), 7);
    auto atoms = all_of(g);
    EXPECT_EQ(coverage(h2, g.train.bk, atoms, {}).pos, coverage(g.planted, g.train.bk, atoms, {}).pos);
}

TEST(Generate, StringFivePairsShape) {
    GeneratedTask g = gen_string(36, 20, 20, 4);
    ASSERT_EQ(g.planted_members.size(), 5u);
    for (const auto& m : g.planted_members) {
        EXPECT_EQ(m.rules.size(), 2u);
        EXPECT_TRUE(is_recursive(m));
        EXPECT_EQ(program_cost(m), 6);
    }
    EXPECT_EQ(g.planted_cost, 30);
    EXPECT_EQ(program_cost(g.planted), 36);
    EXPECT_EQ(g.planted.rules.size(), 11u);
}

TEST(Generate, RealizableAndBalanced) {
    for (const char* family : {"zendo", "string"}) {
        for (int k : {9, 12, 15, 22}) {
            if (std::string(family) == "zendo" && k % 3 != 0) continue;
            if (std::string(family) == "string" && (k - 1) % 7 != 0) continue;
            GeneratedTask g = gen_task(family, k, 30, 40, static_cast<std::uint64_t>(k));
            EXPECT_EQ(g.test_pos.size(), g.test_neg.size());
            EXPECT_EQ(g.train.pos.size(), g.train.neg.size());
            CoverageRecord train = coverage(g.planted, g.train.bk, g.train.pos, g.train.neg);
            EXPECT_EQ(train.fn, 0u);
            EXPECT_EQ(train.fp, 0u);
            EXPECT_DOUBLE_EQ(evaluate(g.planted, g.train.bk, g.test_pos, g.test_neg), 1.0);
            EXPECT_DOUBLE_EQ(evaluate(std::nullopt, g.train.bk, g.test_pos, g.test_neg), 0.5);
        }
    }
}

TEST(Evaluate, IntroFixture) {
    TaskSpec t = load("intro_zendo");
    Examples test = parse_examples(read_file(data_dir() / "intro_zendo" / "test_exs.pl"));
    Program h3 = program(
        "zendo(S) :- zendo1(S), zendo2(S), zendo3(S).\n"
        "zendo1(S) :- piece(S,B), blue(B).\n"
        "zendo2(S) :- piece(S,R), red(R).\n"
        "zendo3(S) :- piece(S,G), green(G).\n");
    EXPECT_DOUBLE_EQ(evaluate(h3, t.bk, test.pos, test.neg), 1.0);
    EXPECT_DOUBLE_EQ(evaluate(std::nullopt, t.bk, test.pos, test.neg), 0.5);
    EXPECT_DOUBLE_EQ(evaluate(program("zendo(S) :- piece(S,B), blue(B)."), t.bk, test.pos, test.neg), 0.75);
}
