#include "rulejoin/datalog.hpp"

#include <algorithm>
#include <optional>
#include <unordered_set>

namespace rulejoin {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

const std::vector<std::uint32_t> kNoRows;

std::vector<std::uint32_t> ground_tuple(const Atom& a) {
    std::vector<std::uint32_t> t;
    t.reserve(a.args.size());
    for (const auto& term : a.args) {
        if (term.is_var()) throw std::invalid_argument("expected a ground atom: " + to_string(a));
        t.push_back(term.value);
    }
    return t;
}

} // namespace

// ---------------------------------------------------------------- Relation

Relation::Relation(std::uint32_t arity) : arity_(arity), index_(arity) {}

std::size_t Relation::hash_tuple(std::span<const std::uint32_t> t) const {
    std::uint64_t h = arity_;
    for (auto v : t) h = mix(h ^ v);
    return static_cast<std::size_t>(h);
}

bool Relation::equal_row(std::uint32_t r, std::span<const std::uint32_t> t) const {
    const std::uint32_t* p = data_.data() + std::size_t{r} * arity_;
    return std::equal(t.begin(), t.end(), p);
}

void Relation::grow() {
    std::size_t cap = slots_.empty() ? 16 : slots_.size() * 2;
    std::vector<std::uint32_t> fresh(cap, 0);
    for (std::uint32_t r = 0; r < count_; ++r) {
        std::size_t i = hash_tuple(row(r)) & (cap - 1);
        while (fresh[i]) i = (i + 1) & (cap - 1);
        fresh[i] = r + 1;
    }
    slots_.swap(fresh);
}

bool Relation::contains(std::span<const std::uint32_t> tuple) const {
    if (tuple.size() != arity_) return false;
    if (arity_ == 0) return count_ > 0;
    if (slots_.empty()) return false;
    std::size_t mask = slots_.size() - 1;
    for (std::size_t i = hash_tuple(tuple) & mask; slots_[i]; i = (i + 1) & mask)
        if (equal_row(slots_[i] - 1, tuple)) return true;
    return false;
}

bool Relation::insert(std::span<const std::uint32_t> tuple) {
    if (tuple.size() != arity_) throw std::invalid_argument("tuple arity mismatch");
    if (arity_ == 0) {
        if (count_) return false;
        count_ = 1;
        return true;
    }
    if ((count_ + 1) * 4 > slots_.size() * 3) grow();
    std::size_t mask = slots_.size() - 1;
    std::size_t i = hash_tuple(tuple) & mask;
    for (; slots_[i]; i = (i + 1) & mask)
        if (equal_row(slots_[i] - 1, tuple)) return false;
    auto r = static_cast<std::uint32_t>(count_++);
    slots_[i] = r + 1;
    data_.insert(data_.end(), tuple.begin(), tuple.end());
    for (std::uint32_t c = 0; c < arity_; ++c) index_[c][tuple[c]].push_back(r);
    return true;
}

const std::vector<std::uint32_t>& Relation::rows_with(std::size_t col, std::uint32_t value) const {
    auto it = index_[col].find(value);
    return it == index_[col].end() ? kNoRows : it->second;
}

// ---------------------------------------------------------------- FactStore

bool FactStore::add(const Atom& ground) {
    auto t = ground_tuple(ground);
    return add(ground.pred, t);
}

bool FactStore::add(Predicate p, std::span<const std::uint32_t> tuple) { return relation_for(p).insert(tuple); }

bool FactStore::contains(const Atom& ground) const {
    const Relation* r = relation(ground.pred);
    if (!r) return false;
    for (const auto& t : ground.args)
        if (t.is_var()) return false;
    std::vector<std::uint32_t> tuple;
    for (const auto& t : ground.args) tuple.push_back(t.value);
    return r->contains(tuple);
}

const Relation* FactStore::relation(Predicate p) const {
    auto it = relations_.find(p.key());
    return it == relations_.end() ? nullptr : &it->second.rel;
}

Relation& FactStore::relation_for(Predicate p) {
    auto it = relations_.find(p.key());
    if (it == relations_.end()) it = relations_.emplace(p.key(), Entry{p, Relation(p.arity)}).first;
    return it->second.rel;
}

std::vector<Predicate> FactStore::predicates() const {
    std::vector<Predicate> out;
    for (const auto& [k, e] : relations_) out.push_back(e.pred);
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t FactStore::size() const {
    std::size_t n = 0;
    for (const auto& [k, e] : relations_) n += e.rel.size();
    return n;
}

// ---------------------------------------------------------------- evaluation

namespace {

using Pending = std::unordered_map<std::uint64_t, std::pair<Predicate, std::vector<std::uint32_t>>>;

// Nested-loop join of one rule body; each literal reads a fixed relation.
class RuleJoin {
public:
    RuleJoin(const Rule& rule, std::vector<const Relation*> rels, Pending& out, std::size_t& emitted,
             std::size_t limit)
        : rule_(rule), rels_(std::move(rels)), out_(out), emitted_(emitted), limit_(limit),
          vals_(static_cast<std::size_t>(64 - std::countl_zero(rule.var_mask())), 0) {
        for (const auto& t : rule.head.args)
            if (t.is_var()) head_mask_ |= std::uint64_t{1} << t.value;
    }

    void run(std::size_t first) {
        for (const auto* r : rels_)
            if (!r || r->size() == 0) return;
        plan(first);
        step(0);
    }

    // For a rule with a ground head: does some body instance hold?
    bool holds() {
        for (const auto* r : rels_)
            if (!r || r->size() == 0) return false;
        plan(rule_.body.size());
        return step(0);
    }

private:
    // Greedy order: most bound arguments first, then smallest relation.
    void plan(std::size_t first) {
        std::size_t n = rule_.body.size();
        std::vector<bool> used(n, false);
        std::uint64_t bound = 0;
        auto place = [&](std::size_t i) {
            used[i] = true;
            order_.push_back(i);
            for (const auto& t : rule_.body[i].args)
                if (t.is_var()) bound |= std::uint64_t{1} << t.value;
        };
        if (first < n) place(first);
        while (order_.size() < n) {
            std::size_t best = n;
            std::size_t best_bound = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (used[i]) continue;
                std::size_t b = 0;
                for (const auto& t : rule_.body[i].args)
                    if (!t.is_var() || (bound >> t.value) & 1U) ++b;
                bool better = best == n || b > best_bound ||
                              (b == best_bound && rels_[i]->size() < rels_[best]->size());
                if (better) {
                    best = i;
                    best_bound = b;
                }
            }
            place(best);
        }
        // A literal whose fresh variables feed nothing later is a pure test.
        local_.assign(n, false);
        std::uint64_t later = head_mask_;
        for (std::size_t d = n; d-- > 0;) {
            std::uint64_t own = 0;
            for (const auto& t : rule_.body[order_[d]].args)
                if (t.is_var()) own |= std::uint64_t{1} << t.value;
            std::uint64_t before = 0;
            for (std::size_t e = 0; e < d; ++e)
                for (const auto& t : rule_.body[order_[e]].args)
                    if (t.is_var()) before |= std::uint64_t{1} << t.value;
            local_[d] = (own & ~before & later) == 0;
            later |= own;
        }
    }

    // Returns whether some completion reached the head. Once every head
    // variable is bound the remaining literals are an existence check.
    bool step(std::size_t depth) {
        if (depth == order_.size()) {
            emit();
            return true;
        }
        const bool exists_only = (bound_ & head_mask_) == head_mask_;
        const bool local = local_[depth];
        bool any = false;
        std::size_t li = order_[depth];
        const Atom& a = rule_.body[li];
        const Relation& rel = *rels_[li];

        int col = -1;
        std::uint32_t key = 0;
        for (std::size_t c = 0; c < a.args.size() && col < 0; ++c) {
            const Term& t = a.args[c];
            if (!t.is_var()) {
                col = static_cast<int>(c);
                key = t.value;
            } else if ((bound_ >> t.value) & 1U) {
                col = static_cast<int>(c);
                key = vals_[t.value];
            }
        }

        auto try_row = [&](std::uint32_t r) {
            auto row = rel.row(r);
            std::uint64_t fresh = 0;
            bool ok = true;
            for (std::size_t c = 0; c < a.args.size(); ++c) {
                const Term& t = a.args[c];
                if (!t.is_var()) {
                    if (row[c] != t.value) { ok = false; break; }
                } else if ((bound_ >> t.value) & 1U) {
                    if (vals_[t.value] != row[c]) { ok = false; break; }
                } else {
                    vals_[t.value] = row[c];
                    std::uint64_t bit = std::uint64_t{1} << t.value;
                    bound_ |= bit;
                    fresh |= bit;
                }
            }
            if (ok && step(depth + 1)) any = true;
            bound_ &= ~fresh;
            return (any && exists_only) || (ok && local);
        };

        if (col >= 0) {
            for (auto r : rel.rows_with(static_cast<std::size_t>(col), key))
                if (try_row(r)) break;
        } else {
            for (std::uint32_t r = 0; r < rel.size(); ++r)
                if (try_row(r)) break;
        }
        return any;
    }

    void emit() {
        auto& slot = out_[rule_.head.pred.key()];
        slot.first = rule_.head.pred;
        for (const auto& t : rule_.head.args) slot.second.push_back(t.is_var() ? vals_[t.value] : t.value);
        if (rule_.head.args.empty()) slot.second.push_back(0);  // marker for propositional heads
        if (++emitted_ > limit_) throw ResourceError("derived-atom limit exceeded");
    }

    const Rule& rule_;
    std::vector<const Relation*> rels_;
    Pending& out_;
    std::size_t& emitted_;
    std::size_t limit_;
    std::vector<std::uint32_t> vals_;
    std::uint64_t bound_ = 0;
    std::uint64_t head_mask_ = 0;
    std::vector<std::size_t> order_;
    std::vector<bool> local_;  // indexed by depth
};

class Saturator {
public:
    Saturator(const std::vector<Rule>& rules, const FactStore& base, const EvalLimits& limits)
        : rules_(rules), base_(base), limits_(limits) {
        for (const auto& r : rules_) {
            if (!r.is_safe()) throw UnsafeRule("unsafe rule: " + to_string(r));
            if (r.num_vars() > 64) throw std::invalid_argument("rule has more than 64 variables");
            idb_.insert(r.head.pred.key());
        }
        for (const auto& r : rules_) {
            Relation& rel = out_.relation_for(r.head.pred);
            if (const Relation* seed = base_.relation(r.head.pred); seed && rel.size() == 0)
                for (std::size_t i = 0; i < seed->size(); ++i) rel.insert(seed->row(i));
        }
    }

    FactStore semi_naive() {
        FactStore delta = round(nullptr);
        while (delta.size() > 0) delta = round(&delta);
        return std::move(out_);
    }

    FactStore naive() {
        while (round(nullptr).size() > 0) {
        }
        return std::move(out_);
    }

private:
    const Relation* full(const Atom& a) const {
        return idb_.count(a.pred.key()) ? out_.relation(a.pred) : base_.relation(a.pred);
    }

    FactStore round(const FactStore* delta) {
        Pending pending;
        std::size_t emitted = 0;
        std::size_t budget = limits_.max_derived;
        for (const auto& rule : rules_) {
            std::vector<const Relation*> rels;
            for (const auto& a : rule.body) rels.push_back(full(a));
            if (!delta) {
                RuleJoin(rule, rels, pending, emitted, budget).run(rule.body.size());
                continue;
            }
            for (std::size_t j = 0; j < rule.body.size(); ++j) {
                if (!idb_.count(rule.body[j].pred.key())) continue;
                const Relation* d = delta->relation(rule.body[j].pred);
                if (!d || d->size() == 0) continue;
                auto variant = rels;
                variant[j] = d;
                RuleJoin(rule, variant, pending, emitted, budget).run(j);
            }
        }

        FactStore fresh;
        for (auto& [key, entry] : pending) {
            auto& [pred, flat] = entry;
            Relation& rel = out_.relation_for(pred);
            std::size_t w = std::max<std::size_t>(pred.arity, 1);
            for (std::size_t i = 0; i + w <= flat.size(); i += w) {
                std::span<const std::uint32_t> t(flat.data() + i, pred.arity);
                if (rel.insert(t)) {
                    fresh.add(pred, t);
                    if (++derived_ > limits_.max_derived) throw ResourceError("derived-atom limit exceeded");
                }
            }
        }
        return fresh;
    }

    const std::vector<Rule>& rules_;
    const FactStore& base_;
    EvalLimits limits_;
    std::unordered_set<std::uint64_t> idb_;
    FactStore out_;
    std::size_t derived_ = 0;
};

void merge_into(FactStore& dst, const FactStore& src) {
    for (const auto& p : src.predicates()) {
        const Relation* r = src.relation(p);
        Relation& d = dst.relation_for(p);
        for (std::size_t i = 0; i < r->size(); ++i) d.insert(r->row(i));
    }
}

void check_heads_against_background(const std::vector<Rule>& rules, const Background& bk) {
    for (const auto& r : rules)
        for (const auto& b : bk.rules)
            for (const auto& a : b.body)
                if (a.pred == r.head.pred)
                    throw BiasViolation("background rule depends on hypothesis predicate " +
                                        std::string(r.head.pred.name.name()));
}

} // namespace

FactStore derive(const std::vector<Rule>& rules, const FactStore& base, const EvalLimits& limits) {
    return Saturator(rules, base, limits).semi_naive();
}

FactStore derive_naive(const std::vector<Rule>& rules, const FactStore& base, const EvalLimits& limits) {
    return Saturator(rules, base, limits).naive();
}

FactStore background_model(const Background& bk, const EvalLimits& limits) {
    FactStore m = bk.facts;
    if (!bk.rules.empty()) merge_into(m, derive(bk.rules, bk.facts, limits));
    return m;
}

FactStore least_model(const Program& h, const Background& bk, const EvalLimits& limits) {
    check_heads_against_background(h.rules, bk);
    FactStore m = background_model(bk, limits);
    merge_into(m, derive(h.rules, m, limits));
    return m;
}

std::vector<Atom> restricted_model(const FactStore& m, Predicate f) {
    std::vector<Atom> out;
    const Relation* r = m.relation(f);
    if (!r) return out;
    for (std::size_t i = 0; i < r->size(); ++i) {
        std::vector<Term> args;
        for (auto v : r->row(i)) args.push_back(Term::constant(Symbol::from_id(v)));
        out.emplace_back(f, std::move(args));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------- coverage

CoverageRecord CoverageRecord::from_bits(Bitset pos, Bitset neg) {
    CoverageRecord c;
    c.tp = pos.count();
    c.fn = pos.size() - c.tp;
    c.fp = neg.count();
    c.pos = std::move(pos);
    c.neg = std::move(neg);
    return c;
}

CoverageTester::CoverageTester(const Background& bk, std::vector<Atom> pos, std::vector<Atom> neg,
                               EvalLimits limits)
    : model_(background_model(bk, limits)), pos_(std::move(pos)), neg_(std::move(neg)), limits_(limits) {
    for (const auto& r : bk.rules)
        for (const auto& a : r.body) bk_body_preds_.push_back(a.pred);
}

void CoverageTester::check_bias(const std::vector<Rule>& rules) const {
    for (const auto& r : rules)
        if (std::find(bk_body_preds_.begin(), bk_body_preds_.end(), r.head.pred) != bk_body_preds_.end())
            throw BiasViolation("background rule depends on hypothesis predicate " +
                                std::string(r.head.pred.name.name()));
}

Bitset CoverageTester::entailed(const FactStore& derived, const std::vector<Atom>& examples) const {
    Bitset bits(examples.size());
    std::vector<std::uint32_t> t;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const Atom& e = examples[i];
        const Relation* r = derived.relation(e.pred);
        if (!r) r = model_.relation(e.pred);
        if (!r) continue;
        t.clear();
        for (const auto& a : e.args) t.push_back(a.value);
        if (r->contains(t)) bits.set(i);
    }
    return bits;
}

namespace {

// Binds the head of r to a ground atom; nullopt when they do not unify.
std::optional<Rule> bind_head(const Rule& r, const Atom& e) {
    if (r.head.pred != e.pred) return std::nullopt;
    std::vector<std::optional<std::uint32_t>> sub(64);
    for (std::size_t i = 0; i < e.args.size(); ++i) {
        const Term& t = r.head.args[i];
        std::uint32_t c = e.args[i].value;
        if (!t.is_var()) {
            if (t.value != c) return std::nullopt;
        } else if (sub[t.value] && *sub[t.value] != c) {
            return std::nullopt;
        } else {
            sub[t.value] = c;
        }
    }
    Rule out{e, r.body};
    for (auto& a : out.body)
        for (auto& t : a.args)
            if (t.is_var() && sub[t.value]) t = Term{Term::Kind::Const, *sub[t.value]};
    return out;
}

} // namespace

// Rules that never read each other's heads are checked per example, top-down.
bool CoverageTester::flat(const std::vector<Rule>& rules) {
    for (const auto& r : rules)
        for (const auto& a : r.body)
            for (const auto& q : rules)
                if (a.pred == q.head.pred) return false;
    return true;
}

Bitset CoverageTester::entailed_flat(const std::vector<Rule>& rules, const std::vector<Atom>& examples) const {
    Bitset bits(examples.size());
    Pending sink;
    std::size_t emitted = 0;
    std::vector<std::uint32_t> t;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const Atom& e = examples[i];
        if (const Relation* base = model_.relation(e.pred)) {
            t.clear();
            for (const auto& a : e.args) t.push_back(a.value);
            if (base->contains(t)) {
                bits.set(i);
                continue;
            }
        }
        for (const auto& r : rules) {
            auto g = bind_head(r, e);
            if (!g) continue;
            std::vector<const Relation*> rels;
            for (const auto& a : g->body) rels.push_back(model_.relation(a.pred));
            emitted = 0;
            if (RuleJoin(*g, std::move(rels), sink, emitted, limits_.max_derived).holds()) {
                bits.set(i);
                break;
            }
        }
        sink.clear();
    }
    return bits;
}

CoverageRecord CoverageTester::test_rules(const std::vector<Rule>& rules, Predicate target) const {
    (void)target;
    check_bias(rules);
    for (const auto& r : rules)
        if (!r.is_safe()) throw UnsafeRule("unsafe rule: " + to_string(r));
    if (flat(rules)) return CoverageRecord::from_bits(entailed_flat(rules, pos_), entailed_flat(rules, neg_));
    FactStore d = derive(rules, model_, limits_);
    return CoverageRecord::from_bits(entailed(d, pos_), entailed(d, neg_));
}

CoverageRecord CoverageTester::test_bottom_up(const Program& h) const {
    check_bias(h.rules);
    FactStore d = derive(h.rules, model_, limits_);
    return CoverageRecord::from_bits(entailed(d, pos_), entailed(d, neg_));
}

CoverageRecord CoverageTester::test(const Program& h) const { return test_rules(h.rules, h.target); }

CoverageRecord coverage(const Program& h, const Background& bk, const std::vector<Atom>& pos,
                        const std::vector<Atom>& neg) {
    return CoverageTester(bk, pos, neg).test(h);
}

} // namespace rulejoin
