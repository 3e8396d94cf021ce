#pragma once

// Joining programs into conjunctions: greedy maximum-coverage selection and
// complete enumeration of subset-maximal coverage conjunctions.

#include <cstddef>
#include <vector>

#include "rulejoin/bitset.hpp"
#include "rulejoin/budget.hpp"
#include "rulejoin/logic.hpp"
#include "rulejoin/sat.hpp"

namespace rulejoin {

struct TestedProgram {
    Program program;
    Bitset pos;
    Bitset neg;
    int cost = 0;
};

struct Conjunction {
    std::vector<Program> members;  // sorted, distinct
    Bitset pos;
    int cost = 0;

    friend bool operator==(const Conjunction& a, const Conjunction& b) { return a.members == b.members; }
    friend auto operator<=>(const Conjunction& a, const Conjunction& b) {
        return std::lexicographical_compare_three_way(a.members.begin(), a.members.end(), b.members.begin(),
                                                      b.members.end());
    }
};

// Builds a conjunction from pool indices; coverage is the intersection of the
// members' positive coverage.
Conjunction make_conjunction(const std::vector<TestedProgram>& pool, const std::vector<std::size_t>& chosen);

struct JoinEncoding {
    sat::Cnf cnf;
    std::vector<sat::Lit> p_vars;  // per pool program
    std::vector<sat::Lit> c_vars;  // per positive example
    std::size_t fplus_groups = 0;
    std::size_t fplus_clauses = 0;
    std::size_t fminus_clauses = 0;
    std::size_t blocking_clauses = 0;
    bool unsat = false;  // an F- or blocking clause came out empty
};

// F+ : c_e -> not p_h for every h not entailing e.
// F- : some member does not entail each negative.
// Block: for each found coverage C, some c_e with e outside C.
// Plus: the selection is non-empty.
JoinEncoding build_join_encoding(const std::vector<TestedProgram>& pool, std::size_t n_pos, std::size_t n_neg,
                                 const std::vector<Bitset>& found);

// Greedy cover: repeatedly selects the conjunction entailing the most
// uncovered positives, then drops members not needed to exclude negatives.
std::vector<Conjunction> incomplete_join(const std::vector<TestedProgram>& pool, std::size_t n_pos,
                                         std::size_t n_neg, Deadline deadline = {});

// Incremental complete enumeration. Bounds are processed one at a time in
// increasing order; conjunctions found at smaller bounds stay blocked.
class CompleteJoiner {
public:
    CompleteJoiner(std::size_t n_pos, std::size_t n_neg) : n_pos_(n_pos), n_neg_(n_neg) {}

    // Enumerates all bounds in (done_bound(), bound]. Returns the newly found
    // conjunctions. Throws BudgetExceeded; conjunctions found before that are kept.
    std::vector<Conjunction> advance(const std::vector<TestedProgram>& pool, int bound, Deadline deadline = {});

    // Enumerates exactly one bound without touching done_bound().
    std::vector<Conjunction> enumerate(const std::vector<TestedProgram>& pool, int bound, Deadline deadline = {});

    int done_bound() const { return done_; }
    const std::vector<Conjunction>& found() const { return found_; }

private:
    std::size_t n_pos_;
    std::size_t n_neg_;
    int done_ = 0;
    std::vector<Conjunction> found_;
    std::vector<Bitset> blocked_;
};

// One minimum-cost conjunction per subset-maximal coverage set among the
// valid conjunctions of cost <= k.
std::vector<Conjunction> complete_join(const std::vector<TestedProgram>& pool, std::size_t n_pos,
                                       std::size_t n_neg, int k, Deadline deadline = {});

// Drops every conjunction whose coverage is contained in that of a strictly
// cheaper one.
std::vector<Conjunction> filter_subsumed(std::vector<Conjunction> cs);

std::vector<Conjunction> join(const std::vector<TestedProgram>& pool, bool have_solution, std::size_t n_pos,
                              std::size_t n_neg, int k, Deadline deadline = {});

std::string to_string(const Conjunction& c);

} // namespace rulejoin
