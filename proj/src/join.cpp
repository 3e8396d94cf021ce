#include "rulejoin/join.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

namespace rulejoin {

using sat::Lit;

Conjunction make_conjunction(const std::vector<TestedProgram>& pool, const std::vector<std::size_t>& chosen) {
    Conjunction c;
    if (chosen.empty()) return c;
    c.pos = pool[chosen.front()].pos;
    for (std::size_t i : chosen) {
        c.members.push_back(pool[i].program);
        c.pos &= pool[i].pos;
        c.cost += pool[i].cost;
    }
    std::sort(c.members.begin(), c.members.end());
    return c;
}

JoinEncoding build_join_encoding(const std::vector<TestedProgram>& pool, std::size_t n_pos, std::size_t n_neg,
                                 const std::vector<Bitset>& found) {
    JoinEncoding enc;
    for (std::size_t i = 0; i < pool.size(); ++i) enc.p_vars.push_back(enc.cnf.new_var());
    for (std::size_t e = 0; e < n_pos; ++e) enc.c_vars.push_back(enc.cnf.new_var());

    for (std::size_t e = 0; e < n_pos; ++e) {
        ++enc.fplus_groups;
        for (std::size_t h = 0; h < pool.size(); ++h) {
            if (pool[h].pos.test(e)) continue;
            enc.cnf.add_clause({-enc.c_vars[e], -enc.p_vars[h]});
            ++enc.fplus_clauses;
        }
    }
    for (std::size_t j = 0; j < n_neg; ++j) {
        std::vector<Lit> clause;
        for (std::size_t h = 0; h < pool.size(); ++h)
            if (!pool[h].neg.test(j)) clause.push_back(enc.p_vars[h]);
        if (clause.empty()) {
            enc.unsat = true;
            continue;
        }
        enc.cnf.add_clause(clause);
        ++enc.fminus_clauses;
    }
    if (pool.empty()) enc.unsat = true;
    else enc.cnf.add_clause(enc.p_vars);
    for (const auto& cov : found) {
        std::vector<Lit> clause;
        for (std::size_t e = 0; e < n_pos; ++e)
            if (!cov.test(e)) clause.push_back(enc.c_vars[e]);
        if (clause.empty()) {
            enc.unsat = true;
            continue;
        }
        enc.cnf.add_clause(clause);
        ++enc.blocking_clauses;
    }
    return enc;
}

namespace {

std::vector<std::size_t> selected(const sat::Solver& s, const JoinEncoding& enc) {
    std::vector<std::size_t> out;
    for (std::size_t h = 0; h < enc.p_vars.size(); ++h)
        if (s.value(enc.p_vars[h])) out.push_back(h);
    return out;
}

std::vector<std::size_t> selected(const std::vector<bool>& model, const JoinEncoding& enc) {
    std::vector<std::size_t> out;
    for (std::size_t h = 0; h < enc.p_vars.size(); ++h)
        if (model[static_cast<std::size_t>(enc.p_vars[h])]) out.push_back(h);
    return out;
}

bool excludes_negatives(const std::vector<TestedProgram>& pool, const std::vector<std::size_t>& chosen,
                        std::size_t n_neg) {
    if (chosen.empty()) return false;
    Bitset neg(n_neg, true);
    for (std::size_t i : chosen) neg &= pool[i].neg;
    return neg.none();
}

// Removes members, most expensive first, while negatives stay excluded.
void shrink(const std::vector<TestedProgram>& pool, std::vector<std::size_t>& chosen, std::size_t n_neg) {
    std::vector<std::size_t> order = chosen;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pool[a].cost > pool[b].cost; });
    for (std::size_t drop : order) {
        std::vector<std::size_t> rest;
        for (std::size_t i : chosen)
            if (i != drop) rest.push_back(i);
        if (excludes_negatives(pool, rest, n_neg)) chosen = std::move(rest);
    }
}

} // namespace

std::vector<Conjunction> incomplete_join(const std::vector<TestedProgram>& pool, std::size_t n_pos,
                                         std::size_t n_neg, Deadline deadline) {
    std::vector<Conjunction> out;
    std::vector<Bitset> found;
    Bitset uncovered(n_pos, true);
    while (uncovered.any()) {
        JoinEncoding enc = build_join_encoding(pool, n_pos, n_neg, found);
        if (enc.unsat) break;
        sat::Solver s;
        s.set_budget({-1, deadline.at});
        s.add(enc.cnf);
        std::vector<Lit> soft;
        uncovered.for_each([&](std::size_t e) { soft.push_back(enc.c_vars[e]); });
        sat::MaxSatResult r = sat::maxsat(s, soft);
        if (!r.sat || r.falsified == static_cast<int>(soft.size())) break;

        std::vector<std::size_t> chosen = selected(r.model, enc);
        shrink(pool, chosen, n_neg);
        Conjunction c = make_conjunction(pool, chosen);
        if ((c.pos & uncovered).none()) break;
        uncovered &= ~c.pos;
        found.push_back(c.pos);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Conjunction> CompleteJoiner::enumerate(const std::vector<TestedProgram>& pool, int bound,
                                                   Deadline deadline) {
    std::vector<Conjunction> out;
    if (pool.empty() || n_pos_ == 0 || bound <= 0) return out;
    int cheapest = std::numeric_limits<int>::max();
    for (const auto& p : pool) cheapest = std::min(cheapest, p.cost);
    if (cheapest > bound) return out;

    JoinEncoding enc = build_join_encoding(pool, n_pos_, n_neg_, blocked_);
    if (enc.unsat) return out;
    sat::Solver s;
    s.set_budget({-1, deadline.at});
    s.add(enc.cnf);
    s.add_clause(enc.c_vars);  // claim at least one positive

    std::vector<int> costs;
    for (const auto& p : pool) costs.push_back(p.cost);
    sat::WeightedCounter counter(s, enc.p_vars, costs, bound);
    std::vector<Lit> base;
    if (Lit l = counter.at_most(bound)) base.push_back(l);

    auto coverage_assumptions = [&](const Bitset& cov) {
        std::vector<Lit> a = base;
        cov.for_each([&](std::size_t e) { a.push_back(enc.c_vars[e]); });
        return a;
    };

    while (s.solve(base) == sat::Result::Sat) {
        std::vector<std::size_t> chosen = selected(s, enc);
        Conjunction c = make_conjunction(pool, chosen);

        // Demand strictly larger coverage until no model remains.
        while (!c.pos.all()) {
            Lit act = s.new_var();
            std::vector<Lit> more{-act};
            for (std::size_t e = 0; e < n_pos_; ++e)
                if (!c.pos.test(e)) more.push_back(enc.c_vars[e]);
            s.add_clause(more);
            std::vector<Lit> a = coverage_assumptions(c.pos);
            a.push_back(act);
            sat::Result r = s.solve(a);
            s.add_clause({-act});
            if (r != sat::Result::Sat) break;
            chosen = selected(s, enc);
            c = make_conjunction(pool, chosen);
        }

        // Cheapest conjunction with the same coverage.
        while (c.cost > 1) {
            Lit cheaper = counter.at_most(c.cost - 1);
            std::vector<Lit> a = coverage_assumptions(c.pos);
            if (cheaper) a.push_back(cheaper);
            if (s.solve(a) != sat::Result::Sat) break;
            Conjunction d = make_conjunction(pool, selected(s, enc));
            if (d.cost >= c.cost) break;
            c = std::move(d);
        }

        std::vector<Lit> block;
        for (std::size_t e = 0; e < n_pos_; ++e)
            if (!c.pos.test(e)) block.push_back(enc.c_vars[e]);
        blocked_.push_back(c.pos);
        found_.push_back(c);
        out.push_back(std::move(c));
        if (block.empty()) break;
        s.add_clause(block);
    }
    return out;
}

std::vector<Conjunction> CompleteJoiner::advance(const std::vector<TestedProgram>& pool, int bound,
                                                 Deadline deadline) {
    std::vector<Conjunction> out;
    for (int b = done_ + 1; b <= bound; ++b) {
        deadline.check("join deadline passed");
        auto found = enumerate(pool, b, deadline);
        out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
        done_ = b;
    }
    return out;
}

std::vector<Conjunction> complete_join(const std::vector<TestedProgram>& pool, std::size_t n_pos,
                                       std::size_t n_neg, int k, Deadline deadline) {
    CompleteJoiner joiner(n_pos, n_neg);
    return joiner.enumerate(pool, k, deadline);
}

std::vector<Conjunction> filter_subsumed(std::vector<Conjunction> cs) {
    std::vector<Conjunction> out;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < cs.size() && !dominated; ++j)
            dominated = j != i && cs[j].cost < cs[i].cost && cs[i].pos.is_subset_of(cs[j].pos);
        if (!dominated) out.push_back(cs[i]);
    }
    return out;
}

std::vector<Conjunction> join(const std::vector<TestedProgram>& pool, bool have_solution, std::size_t n_pos,
                              std::size_t n_neg, int k, Deadline deadline) {
    if (!have_solution) return incomplete_join(pool, n_pos, n_neg, deadline);
    return complete_join(pool, n_pos, n_neg, k, deadline);
}

std::string to_string(const Conjunction& c) {
    std::ostringstream os;
    os << "conjunction cost=" << c.cost << " covers=[";
    bool first = true;
    c.pos.for_each([&](std::size_t e) {
        os << (first ? "" : ",") << e;
        first = false;
    });
    os << "]\n";
    for (const auto& m : c.members) {
        os << "  member:\n";
        std::istringstream lines(to_string(m));
        for (std::string line; std::getline(lines, line);) os << "    " << line << '\n';
    }
    return os.str();
}

} // namespace rulejoin
