#include "rulejoin/generator.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace rulejoin {

void Bias::validate() const {
    if (max_vars < static_cast<int>(head.arity)) throw std::invalid_argument("max_vars below head arity");
    if (max_vars > 64) throw std::invalid_argument("max_vars above 64");
    if (max_body < 1) throw std::invalid_argument("max_body must be at least 1");
    if (max_rules < 1) throw std::invalid_argument("max_rules must be at least 1");
    if (body.empty()) throw std::invalid_argument("no body predicates declared");
}

// ---------------------------------------------------------------- store

namespace {

std::uint64_t pred_bit(const Predicate& p) {
    std::uint64_t x = p.key() * 0x9e3779b97f4a7c15ULL;
    return std::uint64_t{1} << (x >> 58);
}

std::uint64_t body_mask(const Rule& r) {
    std::uint64_t m = 0;
    for (const auto& a : r.body) m |= pred_bit(a.pred);
    return m;
}

} // namespace

void ConstraintStore::add(const Program& h, Verdict v) {
    Key k{h.target.key(), {}};
    for (const auto& r : h.rules) k.rule_masks.push_back(body_mask(r));
    entries_.emplace_back(h, v);
    keys_.push_back(std::move(k));
}

bool ConstraintStore::prunes(const Program& h) const {
    if (entries_.empty()) return false;
    std::vector<std::uint64_t> masks;
    for (const auto& r : h.rules) masks.push_back(body_mask(r));
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const Key& k = keys_[i];
        if (k.head != h.target.key()) continue;
        // Each rule of h needs a rule of g whose predicates it contains.
        bool possible = std::all_of(masks.begin(), masks.end(), [&](std::uint64_t hm) {
            return std::any_of(k.rule_masks.begin(), k.rule_masks.end(),
                               [&](std::uint64_t gm) { return (gm & ~hm) == 0; });
        });
        if (possible && theta_subsumes(entries_[i].first, h)) return true;
    }
    return false;
}

void prune_specialisations(ConstraintStore& store, const Program& h, Verdict v) { store.add(h, v); }

// ---------------------------------------------------------------- generator

Generator::Generator(Bias bias, Deadline deadline) : bias_(std::move(bias)), deadline_(deadline) {
    bias_.validate();
    std::vector<Term> args;
    for (std::uint32_t i = 0; i < bias_.head.arity; ++i) args.push_back(Term::var(i));
    head_ = Atom(bias_.head, std::move(args));
    preds_ = bias_.body;
    if (bias_.enable_recursion) preds_.push_back(bias_.head);
    std::sort(preds_.begin(), preds_.end());
    preds_.erase(std::unique(preds_.begin(), preds_.end()), preds_.end());
    for (auto& [key, syms] : bias_.constants) {
        std::sort(syms.begin(), syms.end());
        syms.erase(std::unique(syms.begin(), syms.end()), syms.end());
    }
}

int Generator::max_cost() const {
    int per_rule = 1 + bias_.max_body;
    return bias_.enable_recursion ? per_rule * bias_.max_rules : per_rule;
}

void Generator::tick() {
    if ((++ticks_ & 1023U) == 0) deadline_.check("generation deadline passed");
}

bool Generator::enumerate_rules(int body_size, bool allow_recursive, const std::function<bool(Rule&&)>& emit) {
    const auto head_mask = head_.pred.arity == 0 ? std::uint64_t{0} : ((std::uint64_t{1} << head_.pred.arity) - 1);
    const auto max_vars = static_cast<std::uint32_t>(bias_.max_vars);
    std::vector<Atom> body;
    body.reserve(static_cast<std::size_t>(body_size));
    bool stopped = false;
    std::size_t max_arity = 0;
    for (const auto& p : preds_) max_arity = std::max<std::size_t>(max_arity, p.arity);

    // Builds the remaining atoms; `next` is the first unused variable index.
    std::function<void(std::uint32_t, std::uint64_t)> place;
    place = [&](std::uint32_t next, std::uint64_t covered) {
        if (stopped) return;
        tick();
        if (body.size() == static_cast<std::size_t>(body_size)) {
            if ((covered & head_mask) != head_mask) return;
            Rule r{head_, body};
            if (std::find(body.begin(), body.end(), head_) != body.end()) return;  // tautology
            if (!(canonicalize(r) == r)) return;
            if (!emit(std::move(r))) stopped = true;
            return;
        }
        // Remaining atoms must still be able to cover the head variables.
        std::size_t left = static_cast<std::size_t>(body_size) - body.size();
        std::size_t missing = static_cast<std::size_t>(std::popcount(head_mask & ~covered));
        if (missing > left * max_arity) return;
        for (const auto& p : preds_) {
            if (stopped) return;
            if (!allow_recursive && p == bias_.head) continue;
            if (!body.empty() && p < body.back().pred) continue;
            std::vector<Term> args(p.arity);
            std::function<void(std::size_t, std::uint32_t, std::uint64_t)> fill;
            fill = [&](std::size_t pos, std::uint32_t nv, std::uint64_t cov) {
                if (stopped) return;
                if (pos == p.arity) {
                    Atom a(p, args);
                    if (!body.empty() && !(body.back() < a)) return;
                    body.push_back(std::move(a));
                    place(nv, cov);
                    body.pop_back();
                    return;
                }
                std::uint32_t top = std::min(nv, max_vars - 1);
                for (std::uint32_t v = 0; v <= top && v < max_vars; ++v) {
                    args[pos] = Term::var(v);
                    fill(pos + 1, v == nv ? nv + 1 : nv, cov | (std::uint64_t{1} << v));
                }
                auto it = bias_.constants.find({p, static_cast<int>(pos)});
                if (it != bias_.constants.end()) {
                    for (Symbol s : it->second) {
                        args[pos] = Term::constant(s);
                        fill(pos + 1, nv, cov);
                    }
                }
            };
            fill(0, next, covered);
        }
    };
    place(head_.pred.arity, 0);
    return !stopped;
}

const std::vector<Generator::Candidate>& Generator::rules_with_body(int body_size) {
    auto it = cache_.find(body_size);
    if (it != cache_.end()) return it->second;
    std::vector<Candidate> out;
    enumerate_rules(body_size, bias_.enable_recursion, [&](Rule&& r) {
        bool rec = r.is_recursive();
        bool single = !rec && (bias_.allow_splittable || (!is_splittable_rule(r) && !has_head_only_atom(r)));
        out.push_back({std::move(r), rec, single});
        return true;
    });
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.rule < b.rule; });
    return cache_.emplace(body_size, std::move(out)).first->second;
}

bool Generator::single_rules(int k, const ConstraintStore& store, const ProgramVisitor& visit) {
    int body_size = k - 1;
    if (body_size < 1 || body_size > bias_.max_body) return true;
    return enumerate_rules(body_size, false, [&](Rule&& r) {
        if (!bias_.allow_splittable && (is_splittable_rule(r) || has_head_only_atom(r))) return true;
        Program h({std::move(r)}, bias_.head);
        if (store.prunes(h)) return true;
        return visit(h);
    });
}

bool Generator::multi_rules(int k, int n_rules, const ConstraintStore& store, const ProgramVisitor& visit) {
    int max_rule_body = std::min(bias_.max_body, k - 2 * n_rules + 1);
    if (max_rule_body < 1) return true;
    std::vector<const Candidate*> all;
    for (int b = 1; b <= max_rule_body; ++b)
        for (const auto& c : rules_with_body(b)) all.push_back(&c);

    std::vector<Rule> chosen;
    bool stopped = false;
    std::function<void(std::size_t, int, bool, bool)> pick;
    pick = [&](std::size_t from, int remaining, bool has_rec, bool has_base) {
        if (stopped) return;
        int left = n_rules - static_cast<int>(chosen.size());
        if (left == 0) {
            if (remaining != 0 || !has_rec || !has_base) return;
            Program h(chosen, bias_.head);
            if (store.prunes(h)) return;
            if (!visit(h)) stopped = true;
            return;
        }
        for (std::size_t i = from; i < all.size() && !stopped; ++i) {
            tick();
            int c = all[i]->rule.size();
            if (c > remaining - 2 * (left - 1)) break;  // costs are non-decreasing
            if (left == 1 && c != remaining) continue;
            chosen.push_back(all[i]->rule);
            pick(i + 1, remaining - c, has_rec || all[i]->recursive, has_base || !all[i]->recursive);
            chosen.pop_back();
        }
    };
    pick(0, k, false, false);
    return !stopped;
}

bool Generator::programs_of_size(int k, const ConstraintStore& store, const ProgramVisitor& visit) {
    if (!single_rules(k, store, visit)) return false;
    if (!bias_.enable_recursion) return true;
    for (int n = 2; n <= bias_.max_rules; ++n)
        if (!multi_rules(k, n, store, visit)) return false;
    return true;
}

std::vector<Program> Generator::collect(int k, const ConstraintStore& store) {
    std::vector<Program> out;
    programs_of_size(k, store, [&](const Program& h) {
        out.push_back(h);
        return true;
    });
    return out;
}

} // namespace rulejoin
