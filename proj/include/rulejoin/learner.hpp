#pragma once

// The generate / test / join / combine / constrain loop.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "rulejoin/datalog.hpp"
#include "rulejoin/task.hpp"

namespace rulejoin {

struct LearnOptions {
    double timeout_s = 0;  // <= 0: no wall-clock limit
    int max_size = -1;     // < 0: unbounded
    bool disable_join = false;
    bool allow_splittable = false;
    bool disable_pruning = false;
    std::uint64_t seed = 0;
    bool verbose = false;  // also report every tested program
    EvalLimits limits;
    std::function<void(const std::string&)> progress;  // one event per call
};

struct RunStats {
    double wall_time_s = 0;
    int final_k = 0;
    std::uint64_t programs_generated = 0;
    std::uint64_t programs_tested = 0;
    std::uint64_t joinable = 0;
    std::uint64_t combinable = 0;
    std::uint64_t pruned_store_size = 0;
    std::uint64_t conjunctions_incomplete = 0;
    std::uint64_t conjunctions_complete = 0;
    std::optional<int> solution_cost;
    std::optional<int> reified_size;
    bool optimal = false;
    bool budget_exhausted = false;
    std::uint64_t seed = 0;
};

struct LearnResult {
    std::optional<Program> program;
    bool optimal = false;
    RunStats stats;
};

enum class Outcome { Solution, Combinable, Joinable, Useless };

Outcome classify_tested(const CoverageRecord& cov);

LearnResult learn(const TaskSpec& task, const LearnOptions& options = {});

// Flat JSON object; timing fields are "wall_time_s" only.
std::string to_json(const RunStats& s);

} // namespace rulejoin
