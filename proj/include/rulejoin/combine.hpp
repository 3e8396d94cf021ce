#pragma once

// Selecting a cheapest union of programs and conjunctions that covers every
// positive example and no negative one.

#include <optional>
#include <set>
#include <vector>

#include "rulejoin/bitset.hpp"
#include "rulejoin/budget.hpp"
#include "rulejoin/datalog.hpp"
#include "rulejoin/join.hpp"
#include "rulejoin/logic.hpp"

namespace rulejoin {

struct CombineUnit {
    std::vector<Program> members;  // one member for a plain program
    bool conjunction = false;
    Bitset pos;
    int cost = 0;
    bool recursive = false;

    static CombineUnit from_program(const Program& h, Bitset pos);
    static CombineUnit from_conjunction(const Conjunction& c);
};

// Renames the target predicate of member i to a fresh `<target>_<n>` for
// n = first_index + i, and adds the linking rule
// target(X..) :- target_n(X..), ... over all members.
// Names listed in `avoid` are skipped.
Program reify_conjunction(const std::vector<Program>& members, Predicate target, int first_index = 1,
                          const std::set<Symbol>& avoid = {});

struct Assembly {
    Program program;
    int cost = 0;          // sum of unit costs
    int reified_size = 0;  // literal count of the assembled program
};

// Union program of the selected units; conjunctions are reified with
// distinct auxiliary predicate names.
Assembly assemble(const std::vector<CombineUnit>& units, const std::vector<std::size_t>& selection,
                  Predicate target, const std::set<Symbol>& avoid = {});

struct Combination {
    std::vector<std::size_t> selection;
    Assembly assembly;
};

// Minimum-cost subset with total cost <= maxsize whose union covers all
// positives; each candidate is re-evaluated and rejected subsets are blocked.
std::optional<Combination> combine(const std::vector<CombineUnit>& units, int maxsize, const CoverageTester& tester,
                                   Predicate target, Deadline deadline = {});

} // namespace rulejoin
