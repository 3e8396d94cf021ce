#pragma once

// Enumeration of candidate programs by increasing cost.

#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "rulejoin/budget.hpp"
#include "rulejoin/logic.hpp"

namespace rulejoin {

struct Bias {
    Predicate head;
    std::vector<Predicate> body;
    int max_vars = 3;
    int max_body = 3;
    int max_rules = 1;
    bool enable_recursion = false;
    // (predicate, argument position) -> constants allowed there
    std::map<std::pair<Predicate, int>, std::vector<Symbol>> constants;
    bool allow_splittable = false;

    void validate() const;  // throws std::invalid_argument
};

enum class Verdict { NoPos, NoNeg };

// Programs whose specialisations are excluded from generation.
class ConstraintStore {
public:
    void add(const Program& h, Verdict v);
    // True iff some stored program theta-subsumes h.
    bool prunes(const Program& h) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<std::pair<Program, Verdict>>& entries() const { return entries_; }

private:
    struct Key {
        std::uint64_t head;
        std::vector<std::uint64_t> rule_masks;
    };
    std::vector<std::pair<Program, Verdict>> entries_;
    std::vector<Key> keys_;
};

// Callback returns false to stop the enumeration early.
using ProgramVisitor = std::function<bool(const Program&)>;

class Generator {
public:
    explicit Generator(Bias bias, Deadline deadline = {});

    // Visits every admissible program of cost exactly k in canonical order.
    // Returns false if the visitor stopped early. Throws BudgetExceeded.
    bool programs_of_size(int k, const ConstraintStore& store, const ProgramVisitor& visit);

    std::vector<Program> collect(int k, const ConstraintStore& store = {});

    // Largest cost any admissible program can have under the bias.
    int max_cost() const;

    const Bias& bias() const { return bias_; }

private:
    struct Candidate {
        Rule rule;
        bool recursive;
        bool single_ok;  // admissible as a one-rule program
    };

    // Canonical, safe, non-tautological rules with `body_size` body atoms.
    const std::vector<Candidate>& rules_with_body(int body_size);
    // Streams canonical rules; emit returns false to stop.
    bool enumerate_rules(int body_size, bool allow_recursive, const std::function<bool(Rule&&)>& emit);

    bool single_rules(int k, const ConstraintStore& store, const ProgramVisitor& visit);
    bool multi_rules(int k, int n_rules, const ConstraintStore& store, const ProgramVisitor& visit);

    void tick();

    Bias bias_;
    Deadline deadline_;
    Atom head_;
    std::vector<Predicate> preds_;
    std::map<int, std::vector<Candidate>> cache_;
    std::uint64_t ticks_ = 0;
};

// Inserts h into the store with the verdict implied by its coverage.
void prune_specialisations(ConstraintStore& store, const Program& h, Verdict v);

} // namespace rulejoin
