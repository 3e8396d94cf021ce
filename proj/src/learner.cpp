#include "rulejoin/learner.hpp"

#include <algorithm>
#include <climits>
#include <set>

#include "json.hpp"
#include "rulejoin/combine.hpp"
#include "rulejoin/generator.hpp"
#include "rulejoin/join.hpp"

namespace rulejoin {

Outcome classify_tested(const CoverageRecord& cov) {
    if (cov.fn == 0 && cov.fp == 0) return Outcome::Solution;
    if (cov.tp == 0) return Outcome::Useless;
    return cov.fp == 0 ? Outcome::Combinable : Outcome::Joinable;
}

namespace {

// Drops units whose coverage is contained in that of a strictly cheaper unit.
std::vector<CombineUnit> undominated(const std::vector<CombineUnit>& units) {
    std::vector<CombineUnit> out;
    for (std::size_t i = 0; i < units.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < units.size() && !dominated; ++j)
            dominated = j != i && units[j].cost < units[i].cost && units[i].pos.is_subset_of(units[j].pos);
        if (!dominated) out.push_back(units[i]);
    }
    return out;
}

class Loop {
public:
    Loop(const TaskSpec& task, const LearnOptions& opt)
        : task_(task), opt_(opt), start_(Clock::now()),
          deadline_(opt.timeout_s > 0 ? Deadline::after(opt.timeout_s) : Deadline{}),
          gen_(adjusted_bias(task.bias, opt), deadline_), tester_(task.bk, task.pos, task.neg, opt.limits),
          joiner_(task.pos.size(), task.neg.size()) {
        stats_.seed = opt.seed;
        if (opt.max_size >= 0) maxsize_ = opt.max_size;
    }

    LearnResult run() {
        try {
            iterate();
            stats_.optimal = true;
        } catch (const BudgetExceeded& e) {
            stats_.budget_exhausted = true;
            emit(std::string("budget exhausted: ") + e.what());
        }
        LearnResult r;
        r.program = best_;
        r.optimal = stats_.optimal;
        if (best_) {
            stats_.solution_cost = best_cost_;
            stats_.reified_size = program_cost(*best_);
        }
        stats_.pruned_store_size = store_.size();
        stats_.wall_time_s = std::chrono::duration<double>(Clock::now() - start_).count();
        r.stats = stats_;
        return r;
    }

private:
    static Bias adjusted_bias(Bias b, const LearnOptions& opt) {
        if (opt.allow_splittable || opt.disable_join) b.allow_splittable = true;
        return b;
    }

    void emit(const std::string& msg) const {
        if (opt_.progress) opt_.progress(msg);
    }

    void iterate() {
        for (int k = 2;; ++k) {
            if (k > maxsize_) return;
            stats_.final_k = k;
            bool exhausted = k > gen_.max_cost();
            if (!exhausted) generate_and_test(k);
            deadline_.check("deadline passed");
            join_and_combine(k, exhausted);
            if (exhausted) return;
        }
    }

    void generate_and_test(int k) {
        emit("generate k=" + std::to_string(k));
        static const ConstraintStore kEmpty;
        const ConstraintStore& store = opt_.disable_pruning ? kEmpty : store_;
        gen_.programs_of_size(k, store, [&](const Program& h) {
            ++stats_.programs_generated;
            CoverageRecord cov;
            try {
                cov = tester_.test(h);
            } catch (const ResourceError&) {
                // too expensive to evaluate; neither kept nor used for pruning
                if (opt_.verbose) emit("skipped (evaluation limit) " + one_line(h));
                return true;
            }
            ++stats_.programs_tested;
            if (opt_.verbose)
                emit("tested tp=" + std::to_string(cov.tp) + " fp=" + std::to_string(cov.fp) + " " +
                     one_line(h));
            Outcome o = classify_tested(cov);
            if (!opt_.disable_pruning) {
                if (cov.tp == 0) prune_specialisations(store_, h, Verdict::NoPos);
                if (cov.fp == 0) prune_specialisations(store_, h, Verdict::NoNeg);
            }
            switch (o) {
            case Outcome::Solution:
                accept(h, program_cost(h));
                return false;
            case Outcome::Combinable:
                ++stats_.combinable;
                programs_.push_back(CombineUnit::from_program(h, cov.pos));
                units_changed_ = true;
                break;
            case Outcome::Joinable:
                ++stats_.joinable;
                if (!opt_.disable_join) {
                    pool_.push_back({h, cov.pos, cov.neg, program_cost(h)});
                    pool_changed_ = true;
                }
                break;
            case Outcome::Useless:
                break;
            }
            return true;
        });
    }

    void accept(const Program& h, int cost) {
        best_ = h;
        best_cost_ = cost;
        maxsize_ = cost - 1;
        emit("solution cost=" + std::to_string(cost) + "; bound tightened maxsize=" + std::to_string(maxsize_));
    }

    void join_and_combine(int k, bool exhausted) {
        for (;;) {
            bool changed = join_stage(k, exhausted);
            changed |= combine_stage();
            if (!changed) return;
        }
    }

    bool join_stage(int k, bool exhausted) {
        if (opt_.disable_join || pool_.empty()) return false;
        std::vector<Conjunction> found;
        bool complete = best_.has_value() || exhausted;
        if (complete) {
            int bound = std::min(k, maxsize_);
            if (exhausted) {
                long total = 0;
                for (const auto& p : pool_) total += p.cost;
                bound = static_cast<int>(std::min<long>(maxsize_, total));
            }
            if (bound <= joiner_.done_bound()) return false;
            emit("join complete bound=" + std::to_string(bound));
            found = joiner_.advance(pool_, bound, deadline_);
            stats_.conjunctions_complete += found.size();
        } else {
            if (!pool_changed_) return false;
            pool_changed_ = false;
            emit("join incomplete pool=" + std::to_string(pool_.size()));
            found = incomplete_join(pool_, task_.pos.size(), task_.neg.size(), deadline_);
            stats_.conjunctions_incomplete += found.size();
        }
        bool added = false;
        for (auto& c : found) {
            if (!seen_.insert(c.members).second) continue;
            emit("conjunction found cost=" + std::to_string(c.cost) + " covers=" + std::to_string(c.pos.count()));
            conjunctions_.push_back(std::move(c));
            added = true;
        }
        units_changed_ |= added;
        return added;
    }

    bool combine_stage() {
        if (!units_changed_ && last_combine_bound_ == maxsize_) return false;
        units_changed_ = false;
        last_combine_bound_ = maxsize_;
        std::vector<CombineUnit> units = programs_;
        for (const auto& c : conjunctions_) units.push_back(CombineUnit::from_conjunction(c));
        units = undominated(units);
        if (units.empty()) return false;
        emit("combine units=" + std::to_string(units.size()) + " maxsize=" + std::to_string(maxsize_));
        auto res = combine(units, maxsize_, tester_, task_.bias.head, deadline_);
        if (!res) return false;
        best_ = res->assembly.program;
        best_cost_ = res->assembly.cost;
        maxsize_ = best_cost_ - 1;
        last_combine_bound_ = maxsize_;
        emit("combination cost=" + std::to_string(best_cost_) + "; bound tightened maxsize=" +
             std::to_string(maxsize_));
        return true;
    }

    static std::string one_line(const Program& h) {
        std::string s;
        for (const auto& r : h.rules) s += (s.empty() ? "" : " ") + to_string(r);
        return s;
    }

    const TaskSpec& task_;
    const LearnOptions& opt_;
    Clock::time_point start_;
    Deadline deadline_;
    Generator gen_;
    CoverageTester tester_;
    CompleteJoiner joiner_;
    ConstraintStore store_;

    std::vector<TestedProgram> pool_;
    std::vector<CombineUnit> programs_;
    std::vector<Conjunction> conjunctions_;
    std::set<std::vector<Program>> seen_;
    bool pool_changed_ = false;
    bool units_changed_ = false;
    int last_combine_bound_ = -1;

    std::optional<Program> best_;
    int best_cost_ = 0;
    int maxsize_ = INT_MAX;
    RunStats stats_;
};

} // namespace

LearnResult learn(const TaskSpec& task, const LearnOptions& options) {
    task.validate();
    Loop loop(task, options);
    return loop.run();
}

std::string to_json(const RunStats& s) {
    nlohmann::ordered_json j;
    j["wall_time_s"] = s.wall_time_s;
    j["final_k"] = s.final_k;
    j["programs_generated"] = s.programs_generated;
    j["programs_tested"] = s.programs_tested;
    j["joinable"] = s.joinable;
    j["combinable"] = s.combinable;
    j["pruned_store_size"] = s.pruned_store_size;
    j["conjunctions_incomplete"] = s.conjunctions_incomplete;
    j["conjunctions_complete"] = s.conjunctions_complete;
    j["solution_cost"] = s.solution_cost ? nlohmann::ordered_json(*s.solution_cost) : nlohmann::ordered_json();
    j["reified_size"] = s.reified_size ? nlohmann::ordered_json(*s.reified_size) : nlohmann::ordered_json();
    j["optimal"] = s.optimal;
    j["budget_exhausted"] = s.budget_exhausted;
    j["seed"] = s.seed;
    return j.dump(2);
}

} // namespace rulejoin
