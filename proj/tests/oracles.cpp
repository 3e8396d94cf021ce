#include "oracles.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace rulejoin::oracle {

namespace {

std::vector<std::uint32_t> vars_of(const Rule& r) {
    std::set<std::uint32_t> vs;
    auto scan = [&](const Atom& a) {
        for (const auto& t : a.args)
            if (t.is_var()) vs.insert(t.value);
    };
    scan(r.head);
    for (const auto& a : r.body) scan(a);
    return {vs.begin(), vs.end()};
}

Atom substitute(const Atom& a, const std::map<std::uint32_t, Term>& sub) {
    Atom out = a;
    for (auto& t : out.args)
        if (t.is_var()) {
            auto it = sub.find(t.value);
            if (it != sub.end()) t = it->second;
        }
    return out;
}

std::set<Atom> body_set(const Rule& r) { return {r.body.begin(), r.body.end()}; }

void merge(FactStore& dst, const FactStore& src) {
    for (const auto& p : src.predicates()) {
        const Relation* rel = src.relation(p);
        for (std::size_t i = 0; i < rel->size(); ++i) dst.add(p, rel->row(i));
    }
}

Bitset holds(const FactStore& derived, const FactStore& base, const std::vector<Atom>& atoms) {
    Bitset b(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (derived.contains(atoms[i]) || base.contains(atoms[i])) b.set(i);
    return b;
}

} // namespace

bool subsumes(const Rule& g, const Rule& s) {
    std::vector<std::uint32_t> gv = vars_of(g);
    std::set<Term> pool;
    for (const auto& t : s.head.args) pool.insert(t);
    for (const auto& a : s.body)
        for (const auto& t : a.args) pool.insert(t);
    std::vector<Term> terms(pool.begin(), pool.end());
    if (terms.empty()) terms.push_back(Term::constant("$none"));
    std::set<Atom> sb = body_set(s);

    std::vector<std::size_t> pick(gv.size(), 0);
    for (;;) {
        std::map<std::uint32_t, Term> sub;
        for (std::size_t i = 0; i < gv.size(); ++i) sub[gv[i]] = terms[pick[i]];
        bool ok = substitute(g.head, sub) == s.head;
        for (std::size_t i = 0; ok && i < g.body.size(); ++i) ok = sb.count(substitute(g.body[i], sub)) > 0;
        if (ok) return true;
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == terms.size()) pick[i++] = 0;
        if (i == pick.size()) return false;
    }
}

bool alpha_equivalent(const Rule& a, const Rule& b) {
    std::vector<std::uint32_t> av = vars_of(a), bv = vars_of(b);
    if (av.size() != bv.size() || a.body.size() != b.body.size()) return false;
    std::set<Atom> target = body_set(b);
    std::vector<std::uint32_t> perm = bv;
    do {
        std::map<std::uint32_t, Term> sub;
        for (std::size_t i = 0; i < av.size(); ++i) sub[av[i]] = Term::var(perm[i]);
        if (!(substitute(a.head, sub) == b.head)) continue;
        std::set<Atom> mapped;
        for (const auto& x : a.body) mapped.insert(substitute(x, sub));
        if (mapped == target) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

bool splittable(const Rule& r) {
    std::set<std::uint32_t> head;
    for (const auto& t : r.head.args)
        if (t.is_var()) head.insert(t.value);
    std::size_t n = r.body.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (const auto& t : r.body[i].args)
                if (t.is_var() && !head.count(t.value) &&
                    std::find(r.body[j].args.begin(), r.body[j].args.end(), t) != r.body[j].args.end())
                    parent[find(i)] = find(j);
    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < n; ++i) roots.insert(find(i));
    return roots.size() >= 2;
}

CoverageRecord coverage(const Program& h, const Background& bk, const std::vector<Atom>& pos,
                        const std::vector<Atom>& neg) {
    FactStore base = bk.facts;
    if (!bk.rules.empty()) merge(base, derive_naive(bk.rules, bk.facts));
    FactStore d = derive_naive(h.rules, base);
    return CoverageRecord::from_bits(holds(d, base, pos), holds(d, base, neg));
}

CoverageRecord conjunction_coverage(const std::vector<Program>& members, const Background& bk,
                                    const std::vector<Atom>& pos, const std::vector<Atom>& neg) {
    Bitset p(pos.size(), true), n(neg.size(), true);
    for (const auto& m : members) {
        CoverageRecord c = oracle::coverage(m, bk, pos, neg);
        p &= c.pos;
        n &= c.neg;
    }
    return CoverageRecord::from_bits(p, n);
}

std::set<std::pair<std::vector<std::size_t>, int>> maximal_joins(const std::vector<TestedProgram>& pool,
                                                                  std::size_t n_neg, int k) {
    std::map<std::vector<std::size_t>, int> best;  // coverage indices -> min cost
    std::size_t n = pool.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        int cost = 0;
        Bitset p, neg_all;
        bool first = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!((mask >> i) & 1U)) continue;
            cost += pool[i].cost;
            if (first) {
                p = pool[i].pos;
                neg_all = pool[i].neg;
                first = false;
            } else {
                p &= pool[i].pos;
                neg_all &= pool[i].neg;
            }
        }
        if (cost > k || p.none() || (n_neg > 0 && neg_all.any())) continue;
        auto key = p.indices();
        auto it = best.find(key);
        if (it == best.end() || cost < it->second) best[key] = cost;
    }
    std::set<std::pair<std::vector<std::size_t>, int>> out;
    for (const auto& [cov, cost] : best) {
        bool dominated = false;
        for (const auto& [other, c2] : best) {
            if (other.size() <= cov.size()) continue;
            dominated = std::includes(other.begin(), other.end(), cov.begin(), cov.end());
            if (dominated) break;
        }
        if (!dominated) out.insert({cov, cost});
    }
    return out;
}

std::vector<Rule> all_rules(const Bias& bias) {
    const std::uint32_t ha = bias.head.arity;
    std::vector<Term> head_args;
    for (std::uint32_t i = 0; i < ha; ++i) head_args.push_back(Term::var(i));
    Atom head(bias.head, head_args);

    std::vector<Atom> atoms;
    for (const auto& p : bias.body) {
        if (p == bias.head && !bias.enable_recursion) continue;
        std::vector<std::vector<Term>> options(p.arity);
        for (std::uint32_t c = 0; c < p.arity; ++c) {
            for (int v = 0; v < bias.max_vars; ++v) options[c].push_back(Term::var(static_cast<std::uint32_t>(v)));
            auto it = bias.constants.find({p, static_cast<int>(c)});
            if (it != bias.constants.end())
                for (Symbol s : it->second) options[c].push_back(Term::constant(s));
        }
        std::vector<std::size_t> idx(p.arity, 0);
        for (;;) {
            std::vector<Term> args;
            for (std::uint32_t c = 0; c < p.arity; ++c) args.push_back(options[c][idx[c]]);
            Atom a(p, args);
            if (!(a == head)) atoms.push_back(a);
            std::size_t c = 0;
            while (c < idx.size() && ++idx[c] == options[c].size()) idx[c++] = 0;
            if (c == idx.size()) break;
        }
    }

    std::set<std::vector<Atom>> seen;
    std::vector<Rule> out;
    std::vector<std::size_t> chosen;
    auto visit = [&] {
        std::vector<Atom> body;
        for (auto i : chosen) body.push_back(atoms[i]);
        Rule r{head, body};
        if (!r.is_safe()) return;
        std::vector<std::uint32_t> vs = vars_of(r);
        std::vector<std::uint32_t> extra;
        for (auto v : vs)
            if (v >= ha) extra.push_back(v);
        if (vs.size() > static_cast<std::size_t>(bias.max_vars)) return;
        std::vector<Atom> key;
        std::vector<std::uint32_t> perm(extra.size());
        std::iota(perm.begin(), perm.end(), ha);
        do {
            std::map<std::uint32_t, Term> sub;
            for (std::size_t i = 0; i < extra.size(); ++i) sub[extra[i]] = Term::var(perm[i]);
            std::vector<Atom> b;
            for (const auto& a : body) b.push_back(substitute(a, sub));
            std::sort(b.begin(), b.end());
            if (key.empty() || b < key) key = b;
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (seen.insert(key).second) out.push_back(Rule{head, key});
    };
    std::vector<std::size_t> stack;
    auto rec = [&](auto&& self, std::size_t from) -> void {
        if (!chosen.empty()) visit();
        if (chosen.size() == static_cast<std::size_t>(bias.max_body)) return;
        for (std::size_t i = from; i < atoms.size(); ++i) {
            chosen.push_back(i);
            self(self, i + 1);
            chosen.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

int optimal_cost(const std::vector<std::pair<Program, CoverageRecord>>& programs, std::size_t n_pos,
                 std::size_t n_neg) {
    const std::size_t width = n_pos + n_neg;
    const std::size_t states = std::size_t{1} << width;
    const int inf = 1 << 29;
    auto mask_of = [&](const CoverageRecord& c) {
        std::size_t m = 0;
        for (std::size_t i = 0; i < n_pos; ++i)
            if (c.pos.test(i)) m |= std::size_t{1} << i;
        for (std::size_t i = 0; i < n_neg; ++i)
            if (c.neg.test(i)) m |= std::size_t{1} << (n_pos + i);
        return m;
    };

    // cheapest non-empty set of programs per intersected coverage
    std::vector<int> conj(states, inf);
    for (const auto& [h, c] : programs) {
        std::size_t m = mask_of(c);
        int w = program_cost(h);
        std::vector<int> next = conj;
        next[m] = std::min(next[m], w);
        for (std::size_t s = 0; s < states; ++s)
            if (conj[s] < inf) next[s & m] = std::min(next[s & m], conj[s] + w);
        conj = std::move(next);
    }

    const std::size_t pos_states = std::size_t{1} << n_pos;
    std::vector<int> unit(pos_states, inf);
    for (std::size_t s = 0; s < states; ++s)
        if ((s >> n_pos) == 0 && s != 0) unit[s] = std::min(unit[s], conj[s]);

    std::vector<int> cover(pos_states, inf);
    cover[0] = 0;
    for (std::size_t s = 0; s < pos_states; ++s) {
        if (cover[s] >= inf) continue;
        for (std::size_t u = 1; u < pos_states; ++u)
            if (unit[u] < inf) cover[s | u] = std::min(cover[s | u], cover[s] + unit[u]);
    }
    int best = cover[pos_states - 1];
    return best >= inf ? -1 : best;
}

TinyTask tiny_task(std::uint64_t seed, bool allow_splittable) {
    std::mt19937_64 rng(seed);
    auto coin = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };

    Bias bias;
    bias.head = Predicate("f", 1);
    bias.body = {Predicate("e", 2), Predicate("p", 1), Predicate("q", 1), Predicate("r", 1)};
    bias.max_vars = 3;
    bias.max_body = 3;
    bias.max_rules = 1;
    bias.allow_splittable = allow_splittable;

    std::vector<Rule> rules = all_rules(bias);
    if (!allow_splittable)
        rules.erase(std::remove_if(rules.begin(), rules.end(), [](const Rule& r) { return splittable(r); }),
                    rules.end());

    const int n_consts = 8;
    auto name = [](int i) { return "c" + std::to_string(i); };
    for (;;) {
        TinyTask t;
        t.task.bias = bias;
        for (int i = 0; i < n_consts; ++i) {
            for (const char* u : {"p", "q", "r"})
                if (coin(0.4)) t.task.bk.facts.add(Atom(Predicate(u, 1), {Term::constant(name(i))}));
            for (int j = 0; j < n_consts; ++j)
                if (coin(0.25))
                    t.task.bk.facts.add(
                        Atom(Predicate("e", 2), {Term::constant(name(i)), Term::constant(name(j))}));
        }
        std::vector<Atom> all;
        for (int i = 0; i < n_consts; ++i) all.push_back(Atom(bias.head, {Term::constant(name(i))}));

        // planted: union of one or two conjunctions of one or two rules
        Bitset label(all.size());
        std::size_t n_units = 1 + rng() % 2;
        for (std::size_t u = 0; u < n_units; ++u) {
            std::size_t n_members = 1 + rng() % 2;
            Bitset unit(all.size(), true);
            for (std::size_t m = 0; m < n_members; ++m) {
                const Rule& r = rules[rng() % rules.size()];
                unit &= oracle::coverage(Program({r}, bias.head), t.task.bk, all, {}).pos;
                t.planted_cost += rule_cost(r);
            }
            label |= unit;
        }
        std::vector<Atom> pos, neg;
        for (std::size_t i = 0; i < all.size(); ++i) (label.test(i) ? pos : neg).push_back(all[i]);
        if (pos.empty() || neg.empty()) continue;
        auto trim = [&](std::vector<Atom>& v) {
            for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
            if (v.size() > 5) v.resize(5);
            std::sort(v.begin(), v.end());
        };
        trim(pos);
        trim(neg);
        t.task.pos = pos;
        t.task.neg = neg;
        return t;
    }
}

int tiny_optimum(const TinyTask& t) {
    std::vector<std::pair<Program, CoverageRecord>> progs;
    for (const Rule& r : all_rules(t.task.bias)) {
        if (!t.task.bias.allow_splittable && splittable(r)) continue;
        Program h({r}, t.task.bias.head);
        progs.emplace_back(h, oracle::coverage(h, t.task.bk, t.task.pos, t.task.neg));
    }
    return optimal_cost(progs, t.task.pos.size(), t.task.neg.size());
}

} // namespace rulejoin::oracle
