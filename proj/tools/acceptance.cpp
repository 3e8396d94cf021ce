// Acceptance checks; one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   rulejoin_acceptance [data_dir] [--only N]...

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.hpp"
#include "rulejoin/combine.hpp"
#include "rulejoin/generator.hpp"
#include "rulejoin/join.hpp"
#include "rulejoin/learner.hpp"
#include "rulejoin/taskgen.hpp"

using namespace rulejoin;
namespace fs = std::filesystem;

namespace {

// tolerances
constexpr double kFixtureSeconds = 1.0;
constexpr double kSplitSeconds = 60.0;
constexpr double kPoolSeconds = 120.0;
constexpr double kTinySeconds = 600.0;
constexpr double kCountSeconds = 60.0;
constexpr int kSplitRules = 1000;
constexpr int kPools = 200;
constexpr int kTinyTasks = 50;
constexpr int kPruneTasks = 30;
constexpr double kZendoBudget = 120.0;
constexpr double kZendoMinAccuracy = 0.95;
constexpr double kBaselineMaxAccuracy = 0.55;
constexpr double kStringBudget = 300.0;
constexpr double kStringMinAccuracy = 1.0;
constexpr int kTrain = 40;
constexpr int kTest = 200;

struct Check {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Program> split_programs(const std::string& text) {
    std::vector<Program> out;
    std::string chunk, line;
    std::istringstream in(text);
    auto flush = [&] {
        if (chunk.find_first_not_of(" \n") != std::string::npos) out.push_back(parse_program(chunk));
        chunk.clear();
    };
    while (std::getline(in, line)) {
        if (line.empty()) flush();
        else if (line[0] != '%') chunk += line + "\n";
    }
    flush();
    return out;
}

TaskSpec load(const fs::path& dir) { return parse_task(dir / "bk.pl", dir / "exs.pl", dir / "bias.pl"); }

Check join_fixture(const fs::path& data) {
    auto t0 = std::chrono::steady_clock::now();
    TaskSpec t = load(data / "join_example");
    auto p = split_programs(read_file(data / "join_example" / "programs.pl"));
    if (p.size() != 5) return {false, "fixture has " + std::to_string(p.size()) + " programs"};
    CoverageTester tester(t.bk, t.pos, t.neg);
    std::vector<TestedProgram> pool;
    for (const auto& h : p) {
        CoverageRecord c = tester.test(h);
        pool.push_back({h, c.pos, c.neg, program_cost(h)});
    }
    auto sorted = [&](std::initializer_list<int> idx) {
        std::vector<Program> m;
        for (int i : idx) m.push_back(p[static_cast<std::size_t>(i - 1)]);
        std::sort(m.begin(), m.end());
        return m;
    };
    std::set<std::vector<Program>> inc, comp;
    for (const auto& c : incomplete_join(pool, t.pos.size(), t.neg.size())) inc.insert(c.members);
    CompleteJoiner cj(t.pos.size(), t.neg.size());
    for (const auto& c : cj.advance(pool, 12)) comp.insert(c.members);
    double secs = seconds_since(t0);
    bool ok = inc == std::set<std::vector<Program>>{sorted({3, 4, 5})} &&
              comp == std::set<std::vector<Program>>{sorted({1, 3}), sorted({2, 3})} && secs < kFixtureSeconds;
    std::ostringstream d;
    d << "incomplete=" << inc.size() << " complete=" << comp.size() << " time=" << secs << "s";
    return {ok, d.str()};
}

Rule random_rule(std::mt19937_64& rng, const std::vector<Predicate>& preds, int max_vars, int max_body) {
    Predicate head("f", 1);
    for (;;) {
        std::size_t n = 1 + rng() % static_cast<std::size_t>(max_body);
        Rule r{Atom(head, {Term::var(0)}), {}};
        for (std::size_t i = 0; i < n; ++i) {
            const Predicate& q = preds[rng() % preds.size()];
            std::vector<Term> args;
            for (std::uint32_t a = 0; a < q.arity; ++a)
                args.push_back(Term::var(static_cast<std::uint32_t>(rng() % static_cast<std::size_t>(max_vars))));
            r.body.push_back(Atom(q, args));
        }
        if (r.is_safe()) return r;
    }
}

Check split_equivalence() {
    std::mt19937_64 rng(2024);
    std::vector<Predicate> preds = {Predicate("e", 2), Predicate("p", 1), Predicate("q", 1), Predicate("r", 1)};
    Predicate f("f", 1);
    int checked = 0, bad = 0, draws = 0;
    while (checked < kSplitRules && draws < 200 * kSplitRules) {
        ++draws;
        Rule r = random_rule(rng, preds, 5, 6);
        if (!is_splittable_rule(r)) continue;
        // a component without the head variable has no safe factor of its own
        auto comps = body_components(r);
        bool anchored = std::all_of(comps.begin(), comps.end(), [&](const std::vector<std::size_t>& c) {
            return std::any_of(c.begin(), c.end(), [&](std::size_t i) {
                const auto& args = r.body[i].args;
                return std::find(args.begin(), args.end(), Term::var(0)) != args.end();
            });
        });
        if (!anchored) continue;
        std::vector<Rule> parts = split_rule(r);
        Background bk;
        std::vector<Atom> pos;
        const int n = 6;
        for (int i = 0; i < n; ++i) {
            Term ci = Term::constant("c" + std::to_string(i));
            pos.push_back(Atom(f, {ci}));
            for (const char* u : {"p", "q", "r"})
                if (rng() % 2) bk.facts.add(Atom(Predicate(u, 1), {ci}));
            for (int j = 0; j < n; ++j)
                if (rng() % 4 == 0) bk.facts.add(Atom(Predicate("e", 2), {ci, Term::constant("c" + std::to_string(j))}));
        }
        Program whole = Program::make({r});
        CoverageRecord expect = oracle::coverage(whole, bk, pos, {});
        std::vector<Program> factors;
        Bitset conj(pos.size(), true);
        for (const Rule& s : parts) {
            factors.push_back(Program::make({s}));
            conj &= oracle::coverage(factors.back(), bk, pos, {}).pos;
        }
        Program reified = reify_conjunction(factors, f);
        bool ok = factors.size() >= 2 && conj == expect.pos && coverage(reified, bk, pos, {}).pos == expect.pos;
        bad += !ok;
        ++checked;
    }
    std::ostringstream d;
    d << "rules=" << checked << " mismatches=" << bad;
    return {checked >= kSplitRules && bad == 0, d.str()};
}

Check join_vs_oracle() {
    std::mt19937_64 rng(4242);
    int bad = 0;
    for (int i = 0; i < kPools; ++i) {
        std::size_t n_pos = 1 + rng() % 5, n_neg = rng() % 6, n = 1 + rng() % 6;
        std::vector<TestedProgram> pool;
        for (std::size_t j = 0; j < n; ++j) {
            TestedProgram t;
            t.program = Program::make({Rule{Atom(Predicate("f", 1), {Term::var(0)}),
                                            {Atom(Predicate("u" + std::to_string(j), 1), {Term::var(0)})}}});
            t.pos = Bitset(n_pos);
            t.neg = Bitset(n_neg);
            for (std::size_t e = 0; e < n_pos; ++e) t.pos.set(e, rng() % 3 != 0);
            for (std::size_t e = 0; e < n_neg; ++e) t.neg.set(e, rng() % 2 == 0);
            if (t.pos.none()) t.pos.set(rng() % n_pos);
            t.cost = 2 + static_cast<int>(rng() % 6);
            pool.push_back(t);
        }
        int k = 2 + static_cast<int>(rng() % 25);
        std::set<std::pair<std::vector<std::size_t>, int>> got;
        for (const auto& c : complete_join(pool, n_pos, n_neg, k)) got.insert({c.pos.indices(), c.cost});
        bad += got != oracle::maximal_joins(pool, n_neg, k);
    }
    return {bad == 0, "pools=" + std::to_string(kPools) + " mismatches=" + std::to_string(bad)};
}

struct TinyRun {
    int oracle_cost;
    std::optional<int> pruned;
    std::optional<int> unpruned;
    bool optimal;
};

std::vector<TinyRun> tiny_runs(int count, bool with_unpruned) {
    std::vector<TinyRun> out;
    for (int i = 0; i < count; ++i) {
        auto tt = oracle::tiny_task(1000 + static_cast<std::uint64_t>(i), i % 2 == 1);
        TinyRun run{oracle::tiny_optimum(tt), std::nullopt, std::nullopt, false};
        LearnResult r = learn(tt.task);
        run.pruned = r.stats.solution_cost;
        run.optimal = r.optimal;
        if (with_unpruned) {
            LearnOptions opt;
            opt.disable_pruning = true;
            run.unpruned = learn(tt.task, opt).stats.solution_cost;
        }
        out.push_back(run);
    }
    return out;
}

Check tiny_optimality(const std::vector<TinyRun>& runs) {
    int bad = 0;
    for (const auto& r : runs) bad += !(r.oracle_cost >= 0 && r.pruned == r.oracle_cost && r.optimal);
    return {static_cast<int>(runs.size()) >= kTinyTasks && bad == 0,
            "tasks=" + std::to_string(runs.size()) + " mismatches=" + std::to_string(bad)};
}

Check generator_counts() {
    Bias b;
    b.head = Predicate("f", 1);
    b.body = {Predicate("piece", 2), Predicate("red", 1), Predicate("blue", 1)};
    b.max_vars = 4;
    b.max_body = 5;
    b.max_rules = 1;
    std::set<Rule> all_set, nonsplit_set;
    for (const Rule& r : oracle::all_rules(b)) {
        Rule c = canonicalize(r);
        all_set.insert(c);
        if (!oracle::splittable(r)) nonsplit_set.insert(c);
    }
    auto count = [&](bool splittable) {
        Bias bb = b;
        bb.allow_splittable = splittable;
        Generator g(bb);
        std::set<Rule> got;
        std::size_t raw = 0;
        for (int k = 2; k <= g.max_cost(); ++k)
            for (const auto& h : g.collect(k)) {
                ++raw;
                got.insert(h.rules.at(0));
            }
        return std::make_pair(got, raw);
    };
    auto [with, with_raw] = count(true);
    auto [without, without_raw] = count(false);
    std::ostringstream d;
    d << "all=" << with.size() << "/" << all_set.size() << " nonsplittable=" << without.size() << "/"
      << nonsplit_set.size();
    bool ok = with == all_set && without == nonsplit_set && with_raw == with.size() &&
              without_raw == without.size() && without.size() < with.size();
    return {ok, d.str()};
}

double run_family(const std::string& family, int k, double budget, bool disable_join, bool* optimal = nullptr) {
    GeneratedTask g = gen_task(family, k, kTrain, kTest, 1);
    LearnOptions opt;
    opt.timeout_s = budget;
    opt.disable_join = disable_join;
    LearnResult r = learn(g.train, opt);
    if (optimal) *optimal = r.optimal;
    return evaluate(r.program, g.train.bk, g.test_pos, g.test_neg);
}

Check scaling() {
    bool ok = true;
    std::ostringstream d;
    d.precision(3);
    for (int k : {12, 21, 30, 45}) {
        double acc = run_family("zendo", k, kZendoBudget, false);
        if (k >= 30) ok &= acc >= kZendoMinAccuracy;
        d << "zendo" << k << "=" << acc << " ";
    }
    for (int k : {30, 45}) {
        double acc = run_family("zendo", k, kZendoBudget, true);
        ok &= acc <= kBaselineMaxAccuracy;
        d << "nojoin" << k << "=" << acc << " ";
    }
    auto t0 = std::chrono::steady_clock::now();
    double acc = run_family("string", 22, kStringBudget, false);
    double secs = seconds_since(t0);
    ok &= acc >= kStringMinAccuracy && secs <= kStringBudget;
    d << "string22=" << acc << " in " << secs << "s";
    return {ok, d.str()};
}

Check pruning_sound(const std::vector<TinyRun>& runs) {
    int bad = 0;
    for (const auto& r : runs)
        if (r.unpruned && (!r.pruned || *r.unpruned < *r.pruned)) ++bad;
    return {bad == 0, "tasks=" + std::to_string(runs.size()) + " cheaper_without_pruning=" + std::to_string(bad)};
}

std::string fingerprint(const LearnResult& r) {
    auto j = nlohmann::json::parse(to_json(r.stats));
    j.erase("wall_time_s");
    return (r.program ? to_string(*r.program) : std::string("none")) + "\n" + j.dump();
}

Check determinism(const fs::path& data) {
    std::vector<std::pair<std::string, TaskSpec>> tasks;
    tasks.emplace_back("string22", gen_task("string", 22, kTrain, kTest, 1).train);
    tasks.emplace_back("join_example", load(data / "join_example"));
    tasks.emplace_back("intro_zendo", load(data / "intro_zendo"));
    for (std::uint64_t s = 0; s < 5; ++s) tasks.emplace_back("tiny" + std::to_string(s), oracle::tiny_task(s, s % 2).task);
    std::string diff;
    for (const auto& [name, t] : tasks)
        if (fingerprint(learn(t)) != fingerprint(learn(t))) diff += name + " ";
    return {diff.empty(), "tasks=" + std::to_string(tasks.size()) + (diff.empty() ? "" : " differ: " + diff)};
}

} // namespace

int main(int argc, char** argv) {
    fs::path data = "tests/data";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) only.insert(std::atoi(argv[++i]));
        else data = a;
    }
    auto want = [&](int n) { return only.empty() || only.count(n); };

    bool all = true;
    std::vector<TinyRun> tiny;
    auto report = [&](int n, const std::function<Check()>& check, double limit_s = 0) {
        if (!want(n)) return;
        auto t0 = std::chrono::steady_clock::now();
        Check v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double secs = seconds_since(t0);
        if (limit_s > 0 && secs > limit_s) {
            v.pass = false;
            v.detail += " over time limit";
        }
        all &= v.pass;
        std::printf("criterion %d: %s  %s  (%.1fs)\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
        std::fflush(stdout);
    };

    report(1, [&] { return join_fixture(data); });
    report(2, split_equivalence, kSplitSeconds);
    report(3, join_vs_oracle, kPoolSeconds);
    report(4, [&] {
        tiny = tiny_runs(std::max(kTinyTasks, kPruneTasks), want(7));
        return tiny_optimality(tiny);
    }, kTinySeconds);
    report(5, generator_counts, kCountSeconds);
    report(6, scaling);
    report(7, [&] {
        if (tiny.empty() || !tiny.front().unpruned) tiny = tiny_runs(kPruneTasks, true);
        return pruning_sound(tiny);
    });
    report(8, [&] { return determinism(data); });
    return all ? 0 : 1;
}
