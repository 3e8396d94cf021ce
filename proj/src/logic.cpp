#include "rulejoin/logic.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <numeric>
#include <optional>
#include <sstream>

namespace rulejoin {

namespace {

constexpr std::uint32_t kMaxVars = 64;

std::uint64_t atom_var_mask(const Atom& a) {
    std::uint64_t m = 0;
    for (const auto& t : a.args) {
        if (t.is_var()) {
            if (t.value >= kMaxVars) throw std::invalid_argument("variable index exceeds 63");
            m |= std::uint64_t{1} << t.value;
        }
    }
    return m;
}

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_atom(const Atom& a) {
    std::size_t h = a.pred.key();
    for (const auto& t : a.args) h = mix(h, (std::size_t{t.value} << 1) | (t.is_var() ? 0 : 1));
    return h;
}

// Lexicographically least body over all renamings of the body-only variables.
class Canonicalizer {
public:
    Canonicalizer(const std::vector<Atom>& atoms, std::array<int, kMaxVars> map, std::uint32_t next)
        : atoms_(atoms), map_(map), next_(next) {}

    std::vector<Atom> run() {
        std::uint64_t all = atoms_.size() == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << atoms_.size()) - 1);
        search(all, next_);
        return std::move(best_);
    }

private:
    Atom encode(const Atom& a, std::uint32_t next) const {
        Atom out;
        out.pred = a.pred;
        out.args.reserve(a.args.size());
        std::vector<std::pair<std::uint32_t, std::uint32_t>> fresh;
        for (const auto& t : a.args) {
            if (!t.is_var()) {
                out.args.push_back(t);
            } else if (map_[t.value] >= 0) {
                out.args.push_back(Term::var(static_cast<std::uint32_t>(map_[t.value])));
            } else {
                auto it = std::find_if(fresh.begin(), fresh.end(), [&](const auto& p) { return p.first == t.value; });
                if (it == fresh.end()) {
                    fresh.emplace_back(t.value, next++);
                    it = std::prev(fresh.end());
                }
                out.args.push_back(Term::var(it->second));
            }
        }
        return out;
    }

    bool prefix_tied() const {
        if (!have_best_) return false;
        for (std::size_t i = 0; i < prefix_.size(); ++i)
            if (!(prefix_[i] == best_[i])) return false;
        return true;
    }

    void search(std::uint64_t remaining, std::uint32_t next) {
        if (remaining == 0) {
            if (!have_best_ || prefix_ < best_) {
                best_ = prefix_;
                have_best_ = true;
            }
            return;
        }
        std::optional<Atom> least;
        std::vector<std::size_t> ties;
        for (std::uint64_t m = remaining; m; m &= m - 1) {
            std::size_t i = static_cast<std::size_t>(std::countr_zero(m));
            Atom e = encode(atoms_[i], next);
            if (!least || e < *least) {
                least = std::move(e);
                ties.assign(1, i);
            } else if (e == *least) {
                ties.push_back(i);
            }
        }
        for (std::size_t i : ties) {
            if (prefix_tied() && best_[prefix_.size()] < *least) return;
            std::vector<std::uint32_t> assigned;
            std::uint32_t n = next;
            for (const auto& t : atoms_[i].args) {
                if (t.is_var() && map_[t.value] < 0) {
                    map_[t.value] = static_cast<int>(n++);
                    assigned.push_back(t.value);
                }
            }
            prefix_.push_back(*least);
            search(remaining & ~(std::uint64_t{1} << i), n);
            prefix_.pop_back();
            for (auto v : assigned) map_[v] = -1;
        }
    }

    const std::vector<Atom>& atoms_;
    std::array<int, kMaxVars> map_;
    std::uint32_t next_;
    std::vector<Atom> prefix_;
    std::vector<Atom> best_;
    bool have_best_ = false;
};

struct Binding {
    std::array<std::optional<Term>, kMaxVars> slots{};

    bool unify(const Atom& g, const Atom& s, std::vector<std::uint32_t>& trail) {
        for (std::size_t i = 0; i < g.args.size(); ++i) {
            const Term& gt = g.args[i];
            const Term& st = s.args[i];
            if (!gt.is_var()) {
                if (!(gt == st)) return false;
                continue;
            }
            auto& slot = slots[gt.value];
            if (slot) {
                if (!(*slot == st)) return false;
            } else {
                slot = st;
                trail.push_back(gt.value);
            }
        }
        return true;
    }

    void undo(std::vector<std::uint32_t>& trail, std::size_t mark) {
        while (trail.size() > mark) {
            slots[trail.back()].reset();
            trail.pop_back();
        }
    }
};

bool match_body(const std::vector<const Atom*>& order, std::size_t i, const Rule& s, Binding& b,
                std::vector<std::uint32_t>& trail) {
    if (i == order.size()) return true;
    const Atom& g = *order[i];
    for (const auto& cand : s.body) {
        if (!(cand.pred == g.pred)) continue;
        std::size_t mark = trail.size();
        if (b.unify(g, cand, trail) && match_body(order, i + 1, s, b, trail)) return true;
        b.undo(trail, mark);
    }
    return false;
}

std::string var_name(std::uint32_t i) {
    if (i < 26) return std::string(1, static_cast<char>('A' + i));
    return "V" + std::to_string(i);
}

} // namespace

Atom::Atom(Predicate p, std::vector<Term> a) : pred(p), args(std::move(a)) {
    if (args.size() != pred.arity)
        throw std::invalid_argument("atom " + std::string(pred.name.name()) + " has " + std::to_string(args.size()) +
                                    " arguments, expected " + std::to_string(pred.arity));
}

bool Atom::is_ground() const {
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_var(); });
}

std::uint64_t Rule::var_mask() const {
    std::uint64_t m = atom_var_mask(head);
    for (const auto& a : body) m |= atom_var_mask(a);
    return m;
}

std::uint64_t Rule::head_var_mask() const { return atom_var_mask(head); }

std::uint32_t Rule::num_vars() const { return static_cast<std::uint32_t>(std::popcount(var_mask())); }

bool Rule::is_safe() const {
    std::uint64_t b = 0;
    for (const auto& a : body) b |= atom_var_mask(a);
    return (atom_var_mask(head) & ~b) == 0;
}

bool Rule::is_recursive() const {
    return std::any_of(body.begin(), body.end(), [&](const Atom& a) { return a.pred == head.pred; });
}

Program Program::make(std::vector<Rule> rules) {
    if (rules.empty()) throw std::invalid_argument("program needs at least one rule");
    Predicate t = rules.front().head.pred;
    return make(std::move(rules), t);
}

Program Program::make(std::vector<Rule> rules, Predicate target) {
    for (auto& r : rules) r = canonicalize(r);
    std::sort(rules.begin(), rules.end());
    rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
    return Program(std::move(rules), target);
}

Rule canonicalize(const Rule& r) {
    if (!r.is_safe()) throw UnsafeRule("unsafe rule: " + to_string(r));
    std::array<int, kMaxVars> map;
    map.fill(-1);
    std::uint32_t next = 0;
    Rule out;
    out.head.pred = r.head.pred;
    for (const auto& t : r.head.args) {
        if (t.is_var()) {
            if (map[t.value] < 0) map[t.value] = static_cast<int>(next++);
            out.head.args.push_back(Term::var(static_cast<std::uint32_t>(map[t.value])));
        } else {
            out.head.args.push_back(t);
        }
    }
    std::vector<Atom> atoms = r.body;
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    if (atoms.size() > 64) throw std::invalid_argument("rule body exceeds 64 atoms");
    out.body = Canonicalizer(atoms, map, next).run();
    return out;
}

int rule_cost(const Rule& r) { return r.size(); }

int program_cost(const Program& h) {
    int c = 0;
    for (const auto& r : h.rules) c += rule_cost(r);
    return c;
}

bool theta_subsumes(const Rule& general, const Rule& specific) {
    if (!(general.head.pred == specific.head.pred)) return false;
    Binding b;
    std::vector<std::uint32_t> trail;
    if (!b.unify(general.head, specific.head, trail)) return false;
    std::vector<const Atom*> order;
    order.reserve(general.body.size());
    for (const auto& a : general.body) {
        bool any = std::any_of(specific.body.begin(), specific.body.end(),
                               [&](const Atom& s) { return s.pred == a.pred; });
        if (!any) return false;
        order.push_back(&a);
    }
    auto candidates = [&](const Atom* a) {
        return std::count_if(specific.body.begin(), specific.body.end(),
                             [&](const Atom& s) { return s.pred == a->pred; });
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](const Atom* x, const Atom* y) { return candidates(x) < candidates(y); });
    return match_body(order, 0, specific, b, trail);
}

bool theta_subsumes(const Program& g, const Program& h) {
    for (const auto& rs : h.rules) {
        bool covered = std::any_of(g.rules.begin(), g.rules.end(),
                                   [&](const Rule& rg) { return theta_subsumes(rg, rs); });
        if (!covered) return false;
    }
    return true;
}

std::vector<std::uint64_t> body_only_masks(const Rule& r) {
    std::uint64_t head = r.head_var_mask();
    std::vector<std::uint64_t> out;
    out.reserve(r.body.size());
    for (const auto& a : r.body) out.push_back(atom_var_mask(a) & ~head);
    return out;
}

std::vector<std::vector<std::size_t>> body_components(const Rule& r) {
    auto masks = body_only_masks(r);
    std::size_t n = masks.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (masks[i] & masks[j]) parent[find(i)] = find(j);
    std::vector<std::vector<std::size_t>> comps;
    std::vector<int> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t root = find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(comps.size());
            comps.emplace_back();
        }
        comps[static_cast<std::size_t>(slot[root])].push_back(i);
    }
    return comps;
}

bool is_splittable_rule(const Rule& r) { return r.body.size() >= 2 && body_components(r).size() >= 2; }

bool is_splittable_program(const Program& h) { return h.rules.size() == 1 && is_splittable_rule(h.rules.front()); }

bool has_head_only_atom(const Rule& r) {
    if (r.body.size() < 2) return false;
    auto masks = body_only_masks(r);
    return std::any_of(masks.begin(), masks.end(), [](std::uint64_t m) { return m == 0; });
}

std::vector<Rule> split_rule(const Rule& r) {
    if (r.is_recursive()) throw std::invalid_argument("cannot split a recursive rule: " + to_string(r));
    std::vector<Rule> out;
    for (const auto& comp : body_components(r)) {
        Rule f;
        f.head = r.head;
        for (auto i : comp) f.body.push_back(r.body[i]);
        out.push_back(canonicalize(f));
    }
    return out;
}

bool is_recursive(const Program& h) {
    for (const auto& r : h.rules)
        for (const auto& a : r.body)
            for (const auto& r2 : h.rules)
                if (a.pred == r2.head.pred) return true;
    return false;
}

bool is_separable(const Program& h) { return h.rules.size() >= 2 && !is_recursive(h); }

std::string to_string(const Term& t) { return t.is_var() ? var_name(t.value) : std::string(t.symbol().name()); }

std::string to_string(const Atom& a) {
    std::string s(a.pred.name.name());
    if (a.args.empty()) return s;
    s += '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) s += ',';
        s += to_string(a.args[i]);
    }
    s += ')';
    return s;
}

std::string to_string(const Rule& r) {
    std::string s = to_string(r.head);
    if (!r.body.empty()) {
        s += " :- ";
        for (std::size_t i = 0; i < r.body.size(); ++i) {
            if (i) s += ", ";
            s += to_string(r.body[i]);
        }
    }
    s += '.';
    return s;
}

std::string to_string(const Program& h) {
    std::string s;
    for (const auto& r : h.rules) {
        s += to_string(r);
        s += '\n';
    }
    return s;
}

std::size_t RuleHash::operator()(const Rule& r) const noexcept {
    std::size_t h = hash_atom(r.head);
    for (const auto& a : r.body) h = mix(h, hash_atom(a));
    return h;
}

std::size_t ProgramHash::operator()(const Program& p) const noexcept {
    std::size_t h = 0;
    for (const auto& r : p.rules) h = mix(h, RuleHash{}(r));
    return h;
}

} // namespace rulejoin
