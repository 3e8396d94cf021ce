#include "rulejoin/combine.hpp"

#include <algorithm>
#include <string>

#include "rulejoin/sat.hpp"

namespace rulejoin {

CombineUnit CombineUnit::from_program(const Program& h, Bitset pos) {
    CombineUnit u;
    u.members = {h};
    u.pos = std::move(pos);
    u.cost = program_cost(h);
    u.recursive = is_recursive(h);
    return u;
}

CombineUnit CombineUnit::from_conjunction(const Conjunction& c) {
    CombineUnit u;
    u.members = c.members;
    u.conjunction = true;
    u.pos = c.pos;
    u.cost = c.cost;
    u.recursive = std::any_of(c.members.begin(), c.members.end(), [](const Program& p) { return is_recursive(p); });
    return u;
}

namespace {

Predicate fresh_aux(Predicate target, int& next, const std::set<Symbol>& avoid) {
    for (;; ++next) {
        Symbol s = Symbol::intern(std::string(target.name.name()) + "_" + std::to_string(next));
        if (!avoid.count(s) && !(s == target.name)) {
            ++next;
            return Predicate(s, target.arity);
        }
    }
}

Atom rename(const Atom& a, Predicate from, Predicate to) {
    if (!(a.pred == from)) return a;
    return Atom(to, a.args);
}

void reify_into(const std::vector<Program>& members, Predicate target, int& next, const std::set<Symbol>& avoid,
                std::vector<Rule>& out) {
    std::vector<Term> vars;
    for (std::uint32_t i = 0; i < target.arity; ++i) vars.push_back(Term::var(i));
    Rule link{Atom(target, vars), {}};
    for (const auto& m : members) {
        Predicate aux = fresh_aux(target, next, avoid);
        for (const auto& r : m.rules) {
            Rule renamed{rename(r.head, target, aux), {}};
            for (const auto& a : r.body) renamed.body.push_back(rename(a, target, aux));
            out.push_back(std::move(renamed));
        }
        link.body.emplace_back(aux, vars);
    }
    out.push_back(std::move(link));
}

} // namespace

Program reify_conjunction(const std::vector<Program>& members, Predicate target, int first_index,
                          const std::set<Symbol>& avoid) {
    if (members.empty()) throw std::invalid_argument("empty conjunction");
    std::vector<Rule> rules;
    int next = first_index;
    reify_into(members, target, next, avoid, rules);
    return Program::make(std::move(rules), target);
}

Assembly assemble(const std::vector<CombineUnit>& units, const std::vector<std::size_t>& selection,
                  Predicate target, const std::set<Symbol>& avoid) {
    Assembly a;
    std::vector<Rule> rules;
    int next = 1;
    for (std::size_t i : selection) {
        const CombineUnit& u = units[i];
        a.cost += u.cost;
        if (u.conjunction) {
            reify_into(u.members, target, next, avoid, rules);
        } else {
            for (const auto& m : u.members) rules.insert(rules.end(), m.rules.begin(), m.rules.end());
        }
    }
    a.program = Program::make(std::move(rules), target);
    a.reified_size = program_cost(a.program);
    return a;
}

std::optional<Combination> combine(const std::vector<CombineUnit>& units, int maxsize, const CoverageTester& tester,
                                   Predicate target, Deadline deadline) {
    if (units.empty() || maxsize < 1) return std::nullopt;
    std::size_t n_pos = tester.pos().size();

    std::set<Symbol> avoid;
    for (const auto& p : tester.model().predicates()) avoid.insert(p.name);

    sat::Solver s;
    s.set_budget({-1, deadline.at});
    std::vector<sat::Lit> sel;
    std::vector<int> costs;
    int total = 0;
    for (const auto& u : units) {
        sel.push_back(s.new_var());
        costs.push_back(u.cost);
        total += u.cost;
    }
    for (std::size_t e = 0; e < n_pos; ++e) {
        std::vector<sat::Lit> cover;
        for (std::size_t u = 0; u < units.size(); ++u)
            if (units[u].pos.test(e)) cover.push_back(sel[u]);
        if (cover.empty()) return std::nullopt;
        s.add_clause(cover);
    }
    s.add_clause(sel);

    int bound = std::min(maxsize, total);
    sat::WeightedCounter counter(s, sel, costs, bound);
    auto at_most = [&](int b) {
        std::vector<sat::Lit> a;
        if (sat::Lit l = counter.at_most(b)) a.push_back(l);
        return a;
    };
    auto chosen = [&] {
        std::vector<std::size_t> out;
        for (std::size_t u = 0; u < units.size(); ++u)
            if (s.value(sel[u])) out.push_back(u);
        return out;
    };
    auto cost_of = [&](const std::vector<std::size_t>& pick) {
        int c = 0;
        for (auto u : pick) c += units[u].cost;
        return c;
    };

    for (;;) {
        deadline.check("combine deadline passed");
        if (s.solve(at_most(bound)) != sat::Result::Sat) return std::nullopt;
        std::vector<std::size_t> pick = chosen();
        int cost = cost_of(pick);
        while (cost > 1 && s.solve(at_most(cost - 1)) == sat::Result::Sat) {
            pick = chosen();
            cost = cost_of(pick);
        }
        Assembly a = assemble(units, pick, target, avoid);
        CoverageRecord cov = tester.test(a.program);
        if (cov.fn == 0 && cov.fp == 0) return Combination{std::move(pick), std::move(a)};
        std::vector<sat::Lit> block;
        for (auto u : pick) block.push_back(-sel[u]);
        s.add_clause(block);
    }
}

} // namespace rulejoin
