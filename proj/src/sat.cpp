#include "rulejoin/sat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

namespace rulejoin::sat {

void Cnf::add_clause(std::span<const Lit> clause) {
    for (Lit l : clause) {
        if (l == 0) throw std::invalid_argument("literal 0 in clause");
        num_vars = std::max(num_vars, std::abs(l));
    }
    clauses.emplace_back(clause.begin(), clause.end());
}

void Cnf::write_dimacs(std::ostream& os) const {
    os << "p cnf " << num_vars << ' ' << clauses.size() << '\n';
    for (const auto& c : clauses) {
        for (Lit l : c) os << l << ' ';
        os << "0\n";
    }
}

bool satisfies(const Cnf& cnf, const std::vector<bool>& assignment) {
    for (const auto& c : cnf.clauses) {
        bool sat = false;
        for (Lit l : c)
            if (assignment[std::abs(l)] == (l > 0)) {
                sat = true;
                break;
            }
        if (!sat) return false;
    }
    return true;
}

// ---------------------------------------------------------------- CDCL

namespace {

// Internal literal: 2*var + sign, var from 0.
using ILit = std::uint32_t;
constexpr ILit kNoLit = ~ILit{0};
constexpr std::uint32_t kNoReason = ~std::uint32_t{0};

inline ILit to_ilit(Lit l) { return static_cast<ILit>((std::abs(l) - 1) * 2 + (l < 0 ? 1 : 0)); }
inline std::uint32_t var_of(ILit l) { return l >> 1; }
inline ILit neg(ILit l) { return l ^ 1U; }
inline bool sign_of(ILit l) { return l & 1U; }

double luby(double y, int x) {
    int size = 1;
    int seq = 0;
    while (size < x + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        --seq;
        x %= size;
    }
    return std::pow(y, seq);
}

struct Clause {
    std::vector<ILit> lits;
    bool learnt = false;
    bool deleted = false;
    double activity = 0;
};

struct Watcher {
    std::uint32_t cref;
    ILit blocker;
};

// Max-heap of variables ordered by activity.
class VarHeap {
public:
    explicit VarHeap(const std::vector<double>& act) : act_(act) {}

    bool empty() const { return heap_.empty(); }
    bool contains(std::uint32_t v) const { return v < pos_.size() && pos_[v] >= 0; }

    void grow(std::uint32_t n) { pos_.resize(n, -1); }

    void insert(std::uint32_t v) {
        if (contains(v)) return;
        pos_[v] = static_cast<int>(heap_.size());
        heap_.push_back(v);
        up(heap_.size() - 1);
    }

    void increased(std::uint32_t v) {
        if (contains(v)) up(static_cast<std::size_t>(pos_[v]));
    }

    std::uint32_t pop() {
        std::uint32_t top = heap_[0];
        heap_[0] = heap_.back();
        pos_[heap_[0]] = 0;
        heap_.pop_back();
        pos_[top] = -1;
        if (!heap_.empty()) down(0);
        return top;
    }

private:
    bool less(std::uint32_t a, std::uint32_t b) const { return act_[a] > act_[b]; }

    void up(std::size_t i) {
        std::uint32_t v = heap_[i];
        while (i > 0) {
            std::size_t p = (i - 1) / 2;
            if (!less(v, heap_[p])) break;
            heap_[i] = heap_[p];
            pos_[heap_[i]] = static_cast<int>(i);
            i = p;
        }
        heap_[i] = v;
        pos_[v] = static_cast<int>(i);
    }

    void down(std::size_t i) {
        std::uint32_t v = heap_[i];
        for (;;) {
            std::size_t c = 2 * i + 1;
            if (c >= heap_.size()) break;
            if (c + 1 < heap_.size() && less(heap_[c + 1], heap_[c])) ++c;
            if (!less(heap_[c], v)) break;
            heap_[i] = heap_[c];
            pos_[heap_[i]] = static_cast<int>(i);
            i = c;
        }
        heap_[i] = v;
        pos_[v] = static_cast<int>(i);
    }

    const std::vector<double>& act_;
    std::vector<std::uint32_t> heap_;
    std::vector<int> pos_;
};

} // namespace

struct Solver::Impl {
    // per variable
    std::vector<std::int8_t> assign;  // 0 undef, 1 true, -1 false
    std::vector<int> level;
    std::vector<std::uint32_t> reason;
    std::vector<double> activity;
    std::vector<bool> phase;
    std::vector<char> seen;
    VarHeap heap{activity};

    std::vector<Clause> clauses;
    std::vector<std::vector<Watcher>> watches;  // per literal
    std::vector<ILit> trail;
    std::vector<std::size_t> trail_lim;
    std::size_t qhead = 0;

    std::vector<bool> model;
    bool ok = true;
    double var_inc = 1.0;
    double cla_inc = 1.0;
    std::uint64_t conflicts = 0;
    std::size_t num_learnts = 0;
    Budget budget;

    std::uint32_t nvars() const { return static_cast<std::uint32_t>(assign.size()); }
    int decision_level() const { return static_cast<int>(trail_lim.size()); }

    std::int8_t lit_value(ILit l) const {
        std::int8_t v = assign[var_of(l)];
        return sign_of(l) ? static_cast<std::int8_t>(-v) : v;
    }

    int new_var() {
        std::uint32_t v = nvars();
        assign.push_back(0);
        level.push_back(0);
        reason.push_back(kNoReason);
        activity.push_back(0);
        phase.push_back(false);
        seen.push_back(0);
        watches.emplace_back();
        watches.emplace_back();
        heap.grow(v + 1);
        heap.insert(v);
        return static_cast<int>(v) + 1;
    }

    void enqueue(ILit l, std::uint32_t from) {
        std::uint32_t v = var_of(l);
        assign[v] = sign_of(l) ? -1 : 1;
        level[v] = decision_level();
        reason[v] = from;
        trail.push_back(l);
    }

    std::uint32_t attach(std::vector<ILit> lits, bool learnt) {
        auto cref = static_cast<std::uint32_t>(clauses.size());
        watches[neg(lits[0])].push_back({cref, lits[1]});
        watches[neg(lits[1])].push_back({cref, lits[0]});
        clauses.push_back(Clause{std::move(lits), learnt, false, 0});
        if (learnt) ++num_learnts;
        return cref;
    }

    void add_clause(std::span<const Lit> input) {
        if (!ok) return;
        if (decision_level() != 0) cancel_until(0);
        std::vector<ILit> lits;
        for (Lit l : input) {
            if (l == 0) throw std::invalid_argument("literal 0 in clause");
            while (static_cast<std::uint32_t>(std::abs(l)) > nvars()) new_var();
            lits.push_back(to_ilit(l));
        }
        std::sort(lits.begin(), lits.end());
        std::vector<ILit> kept;
        ILit prev = kNoLit;
        for (ILit l : lits) {
            if (l == prev) continue;
            if (prev != kNoLit && l == neg(prev)) return;  // tautology
            std::int8_t v = lit_value(l);
            if (v > 0) return;  // already satisfied at level 0
            if (v == 0) kept.push_back(l);
            prev = l;
        }
        if (kept.empty()) {
            ok = false;
        } else if (kept.size() == 1) {
            enqueue(kept[0], kNoReason);
            if (propagate() != kNoReason) ok = false;
        } else {
            attach(std::move(kept), false);
        }
    }

    // Returns the conflicting clause or kNoReason.
    std::uint32_t propagate() {
        std::uint32_t conflict = kNoReason;
        while (qhead < trail.size()) {
            ILit p = trail[qhead++];
            auto& ws = watches[p];
            std::size_t i = 0, j = 0;
            ILit false_lit = neg(p);
            while (i < ws.size()) {
                Watcher w = ws[i];
                if (lit_value(w.blocker) > 0) {
                    ws[j++] = ws[i++];
                    continue;
                }
                Clause& c = clauses[w.cref];
                if (c.deleted) {
                    ++i;
                    continue;
                }
                auto& lits = c.lits;
                if (lits[0] == false_lit) std::swap(lits[0], lits[1]);
                ++i;
                ILit first = lits[0];
                if (first != w.blocker && lit_value(first) > 0) {
                    ws[j++] = {w.cref, first};
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < lits.size(); ++k) {
                    if (lit_value(lits[k]) >= 0) {
                        std::swap(lits[1], lits[k]);
                        watches[neg(lits[1])].push_back({w.cref, first});
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                ws[j++] = {w.cref, first};
                if (lit_value(first) < 0) {
                    conflict = w.cref;
                    qhead = trail.size();
                    while (i < ws.size()) ws[j++] = ws[i++];
                } else {
                    enqueue(first, w.cref);
                }
            }
            ws.resize(j);
            if (conflict != kNoReason) break;
        }
        return conflict;
    }

    void cancel_until(int lvl) {
        if (decision_level() <= lvl) return;
        for (std::size_t i = trail.size(); i > trail_lim[static_cast<std::size_t>(lvl)]; --i) {
            std::uint32_t v = var_of(trail[i - 1]);
            phase[v] = assign[v] < 0;
            assign[v] = 0;
            reason[v] = kNoReason;
            heap.insert(v);
        }
        trail.resize(trail_lim[static_cast<std::size_t>(lvl)]);
        trail_lim.resize(static_cast<std::size_t>(lvl));
        qhead = trail.size();
    }

    void bump_var(std::uint32_t v) {
        activity[v] += var_inc;
        if (activity[v] > 1e100) {
            for (auto& a : activity) a *= 1e-100;
            var_inc *= 1e-100;
        }
        heap.increased(v);
    }

    void bump_clause(Clause& c) {
        c.activity += cla_inc;
        if (c.activity > 1e20) {
            for (auto& cl : clauses)
                if (cl.learnt) cl.activity *= 1e-20;
            cla_inc *= 1e-20;
        }
    }

    bool redundant(ILit l) const {
        std::uint32_t r = reason[var_of(l)];
        if (r == kNoReason) return false;
        for (ILit q : clauses[r].lits) {
            std::uint32_t v = var_of(q);
            if (v == var_of(l)) continue;
            if (!seen[v] && level[v] > 0) return false;
        }
        return true;
    }

    // First-UIP conflict analysis.
    void analyze(std::uint32_t confl, std::vector<ILit>& learnt, int& back_level) {
        learnt.assign(1, kNoLit);
        int pending = 0;
        ILit p = kNoLit;
        std::size_t index = trail.size();
        do {
            Clause& c = clauses[confl];
            if (c.learnt) bump_clause(c);
            for (ILit q : c.lits) {
                if (p != kNoLit && q == p) continue;
                std::uint32_t v = var_of(q);
                if (seen[v] || level[v] == 0) continue;
                seen[v] = 1;
                bump_var(v);
                if (level[v] >= decision_level()) ++pending;
                else learnt.push_back(q);
            }
            while (!seen[var_of(trail[--index])]) {
            }
            p = trail[index];
            confl = reason[var_of(p)];
            seen[var_of(p)] = 0;
            --pending;
        } while (pending > 0);
        learnt[0] = neg(p);

        std::vector<ILit> all = learnt;
        std::size_t j = 1;
        for (std::size_t i = 1; i < learnt.size(); ++i)
            if (!redundant(learnt[i])) learnt[j++] = learnt[i];
        learnt.resize(j);
        for (ILit l : all) seen[var_of(l)] = 0;

        back_level = 0;
        if (learnt.size() > 1) {
            std::size_t max_i = 1;
            for (std::size_t i = 2; i < learnt.size(); ++i)
                if (level[var_of(learnt[i])] > level[var_of(learnt[max_i])]) max_i = i;
            std::swap(learnt[1], learnt[max_i]);
            back_level = level[var_of(learnt[1])];
        }
    }

    void reduce_db() {
        std::vector<std::uint32_t> cand;
        for (std::uint32_t i = 0; i < clauses.size(); ++i) {
            const Clause& c = clauses[i];
            if (!c.learnt || c.deleted || c.lits.size() <= 2) continue;
            std::uint32_t r = reason[var_of(c.lits[0])];
            if (r == i && lit_value(c.lits[0]) > 0) continue;  // locked
            cand.push_back(i);
        }
        std::sort(cand.begin(), cand.end(),
                  [&](std::uint32_t a, std::uint32_t b) { return clauses[a].activity < clauses[b].activity; });
        for (std::size_t i = 0; i < cand.size() / 2; ++i) {
            clauses[cand[i]].deleted = true;
            clauses[cand[i]].lits.clear();
            clauses[cand[i]].lits.shrink_to_fit();
            --num_learnts;
        }
        for (auto& ws : watches)
            ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watcher& w) { return clauses[w.cref].deleted; }),
                     ws.end());
    }

    void check_budget() const {
        if (budget.max_conflicts >= 0 && conflicts > static_cast<std::uint64_t>(budget.max_conflicts))
            throw BudgetExceeded("conflict budget exhausted");
        if (budget.deadline && (conflicts & 63U) == 0 && std::chrono::steady_clock::now() > *budget.deadline)
            throw BudgetExceeded("solver deadline passed");
    }

    // Returns 1 sat, -1 unsat, 0 restart.
    int search(std::uint64_t conflict_limit, const std::vector<ILit>& assumptions) {
        std::uint64_t local = 0;
        std::vector<ILit> learnt;
        for (;;) {
            std::uint32_t confl = propagate();
            if (confl != kNoReason) {
                ++conflicts;
                ++local;
                if (decision_level() == 0) return -1;
                int back = 0;
                analyze(confl, learnt, back);
                cancel_until(back);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], kNoReason);
                } else {
                    std::uint32_t cref = attach(learnt, true);
                    bump_clause(clauses[cref]);
                    enqueue(learnt[0], cref);
                }
                var_inc /= 0.95;
                cla_inc /= 0.999;
                check_budget();
                continue;
            }
            if (local >= conflict_limit) {
                cancel_until(0);
                return 0;
            }
            if (num_learnts >= 4000 + trail.size() + conflicts / 4) reduce_db();

            ILit next = kNoLit;
            while (static_cast<std::size_t>(decision_level()) < assumptions.size()) {
                ILit a = assumptions[static_cast<std::size_t>(decision_level())];
                std::int8_t v = lit_value(a);
                if (v > 0) {
                    trail_lim.push_back(trail.size());  // dummy level
                } else if (v < 0) {
                    return -2;  // assumptions conflict
                } else {
                    next = a;
                    break;
                }
            }
            if (next == kNoLit) {
                while (!heap.empty()) {
                    std::uint32_t v = heap.pop();
                    if (assign[v] == 0) {
                        next = 2 * v + (phase[v] ? 1U : 0U);
                        break;
                    }
                }
                if (next == kNoLit) return 1;
            }
            trail_lim.push_back(trail.size());
            enqueue(next, kNoReason);
        }
    }

    Result solve(std::span<const Lit> assumptions_in) {
        model.clear();
        if (!ok) return Result::Unsat;
        std::vector<ILit> assumptions;
        for (Lit l : assumptions_in) {
            while (static_cast<std::uint32_t>(std::abs(l)) > nvars()) new_var();
            assumptions.push_back(to_ilit(l));
        }
        cancel_until(0);
        if (propagate() != kNoReason) {
            ok = false;
            return Result::Unsat;
        }
        int status = 0;
        try {
            for (int round = 0; status == 0; ++round) {
                status = search(static_cast<std::uint64_t>(luby(2, round) * 100), assumptions);
            }
        } catch (...) {
            cancel_until(0);
            throw;
        }
        if (status == 1) {
            model.assign(nvars() + 1, false);
            for (std::uint32_t v = 0; v < nvars(); ++v) model[v + 1] = assign[v] > 0;
        } else if (status == -1) {
            ok = false;
        }
        cancel_until(0);
        return status == 1 ? Result::Sat : Result::Unsat;
    }
};

Solver::Solver() : impl_(new Impl) {}
Solver::~Solver() { delete impl_; }

int Solver::new_var() { return impl_->new_var(); }
int Solver::num_vars() const { return static_cast<int>(impl_->nvars()); }
void Solver::add_clause(std::span<const Lit> clause) { impl_->add_clause(clause); }
void Solver::add(const Cnf& cnf) {
    while (num_vars() < cnf.num_vars) new_var();
    for (const auto& c : cnf.clauses) impl_->add_clause(c);
}
Result Solver::solve(std::span<const Lit> assumptions) { return impl_->solve(assumptions); }

bool Solver::value(Lit l) const {
    auto v = static_cast<std::size_t>(std::abs(l));
    if (v >= impl_->model.size()) throw std::logic_error("no model for literal");
    return impl_->model[v] == (l > 0);
}

std::vector<bool> Solver::model() const { return impl_->model; }
void Solver::set_budget(Budget b) { impl_->budget = b; }
std::uint64_t Solver::conflicts() const { return impl_->conflicts; }
bool Solver::okay() const { return impl_->ok; }

// ---------------------------------------------------------------- counters

WeightedCounter::WeightedCounter(ClauseSink& sink, std::vector<Lit> xs, std::vector<int> weights, int max_bound)
    : limit_(std::max(max_bound, 0) + 1) {
    if (xs.size() != weights.size()) throw std::invalid_argument("weights and literals differ in length");
    for (int w : weights) {
        if (w <= 0) throw std::invalid_argument("weights must be positive");
        total_ += w;
    }
    const int L = limit_;
    std::vector<Lit> prev;  // prev[j-1] = s_{i-1,j}
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::vector<Lit> cur(static_cast<std::size_t>(L));
        for (auto& s : cur) s = sink.new_var();
        int w = std::min(weights[i], L);
        for (int j = 1; j <= w; ++j) sink.add_clause({-xs[i], cur[static_cast<std::size_t>(j - 1)]});
        if (!prev.empty()) {
            for (int j = 1; j <= L; ++j) {
                Lit p = prev[static_cast<std::size_t>(j - 1)];
                sink.add_clause({-p, cur[static_cast<std::size_t>(j - 1)]});
                int t = std::min(j + weights[i], L);
                sink.add_clause({-xs[i], -p, cur[static_cast<std::size_t>(t - 1)]});
            }
        }
        prev = std::move(cur);
    }
    reach_ = std::move(prev);
}

Lit WeightedCounter::at_most(int b) const {
    if (b < 0) throw std::invalid_argument("negative bound");
    if (b >= total_) return 0;
    if (b + 1 > limit_) throw std::out_of_range("bound above counter limit");
    return -reach_[static_cast<std::size_t>(b)];
}

void encode_size_bound(ClauseSink& sink, const std::vector<Lit>& xs, const std::vector<int>& weights, int k) {
    WeightedCounter counter(sink, xs, weights, k);
    if (Lit l = counter.at_most(k)) sink.add_clause({l});
}

// ---------------------------------------------------------------- MaxSAT

MaxSatResult maxsat(Solver& solver, const std::vector<Lit>& soft, std::span<const Lit> assumptions) {
    MaxSatResult best;
    if (solver.solve(assumptions) != Result::Sat) return best;
    auto count_false = [&] {
        int f = 0;
        for (Lit s : soft)
            if (!solver.value(s)) ++f;
        return f;
    };
    best.sat = true;
    best.model = solver.model();
    best.falsified = count_false();
    if (best.falsified == 0) return best;

    std::vector<Lit> violated;
    for (Lit s : soft) violated.push_back(-s);
    WeightedCounter counter(solver, violated, std::vector<int>(soft.size(), 1), best.falsified);
    std::vector<Lit> assume(assumptions.begin(), assumptions.end());
    while (best.falsified > 0) {
        assume.resize(assumptions.size());
        assume.push_back(counter.at_most(best.falsified - 1));
        if (solver.solve(assume) != Result::Sat) break;
        best.model = solver.model();
        best.falsified = count_false();
    }
    return best;
}

MaxSatResult maxsat(const Cnf& hard, const std::vector<Lit>& soft, Budget budget) {
    Solver s;
    s.set_budget(budget);
    s.add(hard);
    for (Lit l : soft)
        while (s.num_vars() < std::abs(l)) s.new_var();
    return maxsat(s, soft, {});
}

} // namespace rulejoin::sat
