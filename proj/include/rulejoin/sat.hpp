#pragma once

// Propositional core: clause containers, a CDCL solver with assumptions,
// a weighted sequential counter and linear-search MaxSAT over unit softs.
//
// Literals are non-zero ints in DIMACS convention: v or -v for variable v >= 1.

#include <chrono>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rulejoin/budget.hpp"

namespace rulejoin::sat {

using Lit = int;

class ClauseSink {
public:
    virtual ~ClauseSink() = default;
    virtual int new_var() = 0;
    virtual void add_clause(std::span<const Lit> clause) = 0;

    void add_clause(std::initializer_list<Lit> clause) { add_clause(std::span<const Lit>(clause.begin(), clause.size())); }
};

struct Cnf final : ClauseSink {
    int num_vars = 0;
    std::vector<std::vector<Lit>> clauses;

    int new_var() override { return ++num_vars; }
    void add_clause(std::span<const Lit> clause) override;
    using ClauseSink::add_clause;

    void write_dimacs(std::ostream& os) const;
};

// Truth-table check of a clause set under a full assignment (index = var).
bool satisfies(const Cnf& cnf, const std::vector<bool>& assignment);

enum class Result { Sat, Unsat };

struct Budget {
    std::int64_t max_conflicts = -1;  // -1: unlimited
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

class Solver final : public ClauseSink {
public:
    Solver();
    ~Solver() override;
    Solver(const Solver&) = delete;
    Solver& operator=(const Solver&) = delete;

    int new_var() override;
    int num_vars() const;
    void add_clause(std::span<const Lit> clause) override;
    using ClauseSink::add_clause;
    void add(const Cnf& cnf);

    // Throws BudgetExceeded when the budget runs out before an answer.
    Result solve(std::span<const Lit> assumptions = {});
    Result solve(std::initializer_list<Lit> assumptions) {
        return solve(std::span<const Lit>(assumptions.begin(), assumptions.size()));
    }

    // Value of a literal in the last model.
    bool value(Lit l) const;
    std::vector<bool> model() const;  // index 0 unused

    void set_budget(Budget b);
    std::uint64_t conflicts() const;
    bool okay() const;  // false once the clause set is unsatisfiable at level 0

private:
    struct Impl;
    Impl* impl_;
};

// Sequential weighted counter over literals xs with positive weights.
// Supports "sum <= b" for every b < max_bound + 1 via at_most(b).
class WeightedCounter {
public:
    WeightedCounter(ClauseSink& sink, std::vector<Lit> xs, std::vector<int> weights, int max_bound);

    // Literal whose truth forces sum(xs) <= b; 0 when no constraint is needed.
    Lit at_most(int b) const;
    int max_bound() const { return limit_ - 1; }
    int total() const { return total_; }

private:
    int limit_;
    int total_ = 0;
    std::vector<Lit> reach_;  // reach_[j]: partial sum of all xs reaches j (j in 1..limit_)
};

// Adds clauses that restrict sum(weights[i] * xs[i]) <= k. Exact on xs.
void encode_size_bound(ClauseSink& sink, const std::vector<Lit>& xs, const std::vector<int>& weights, int k);

struct MaxSatResult {
    bool sat = false;
    int falsified = 0;
    std::vector<bool> model;
};

// Maximises the number of satisfied unit soft literals under the hard clauses
// already in `solver` and the given assumptions.
MaxSatResult maxsat(Solver& solver, const std::vector<Lit>& soft, std::span<const Lit> assumptions = {});

// Convenience form over a standalone CNF.
MaxSatResult maxsat(const Cnf& hard, const std::vector<Lit>& soft, Budget budget = {});

} // namespace rulejoin::sat
