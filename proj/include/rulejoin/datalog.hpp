#pragma once

// Bottom-up evaluation of definite programs over ground facts.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rulejoin/bitset.hpp"
#include "rulejoin/logic.hpp"

namespace rulejoin {

class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BiasViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Set of ground tuples with a hash index on every argument position.
class Relation {
public:
    explicit Relation(std::uint32_t arity = 0);

    std::uint32_t arity() const { return arity_; }
    std::size_t size() const { return count_; }

    bool insert(std::span<const std::uint32_t> tuple);
    bool contains(std::span<const std::uint32_t> tuple) const;

    std::span<const std::uint32_t> row(std::size_t i) const {
        return {data_.data() + i * arity_, arity_};
    }
    // Row ids whose column `col` holds `value`.
    const std::vector<std::uint32_t>& rows_with(std::size_t col, std::uint32_t value) const;

private:
    std::size_t hash_tuple(std::span<const std::uint32_t> t) const;
    bool equal_row(std::uint32_t r, std::span<const std::uint32_t> t) const;
    void grow();

    std::uint32_t arity_;
    std::size_t count_ = 0;
    std::vector<std::uint32_t> data_;
    std::vector<std::uint32_t> slots_;  // row id + 1; 0 marks an empty slot
    std::vector<std::unordered_map<std::uint32_t, std::vector<std::uint32_t>>> index_;
};

class FactStore {
public:
    bool add(const Atom& ground);
    bool add(Predicate p, std::span<const std::uint32_t> tuple);
    bool contains(const Atom& ground) const;

    const Relation* relation(Predicate p) const;
    Relation& relation_for(Predicate p);

    std::vector<Predicate> predicates() const;
    std::size_t size() const;

private:
    struct Entry {
        Predicate pred;
        Relation rel;
    };
    std::unordered_map<std::uint64_t, Entry> relations_;
};

struct EvalLimits {
    std::size_t max_derived = 10'000'000;
};

// Background knowledge: ground facts plus auxiliary definite rules.
struct Background {
    FactStore facts;
    std::vector<Rule> rules;
};

// Least fixpoint of `rules` on top of `base`. Relations for predicates
// defined by `rules` live in the returned store; all other body predicates are
// read from `base`. Semi-naive (delta-driven).
FactStore derive(const std::vector<Rule>& rules, const FactStore& base, const EvalLimits& limits = {});

// Reference evaluator: naive iteration of the immediate-consequence operator.
FactStore derive_naive(const std::vector<Rule>& rules, const FactStore& base, const EvalLimits& limits = {});

// Closes the background facts under the background rules.
FactStore background_model(const Background& bk, const EvalLimits& limits = {});

// M(h ∪ B) as a single store. Throws BiasViolation when a head predicate of h
// occurs in the body of a background rule.
FactStore least_model(const Program& h, const Background& bk, const EvalLimits& limits = {});

std::vector<Atom> restricted_model(const FactStore& m, Predicate f);

struct CoverageRecord {
    Bitset pos;
    Bitset neg;
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;

    static CoverageRecord from_bits(Bitset pos, Bitset neg);
    friend bool operator==(const CoverageRecord&, const CoverageRecord&) = default;
};

// Tests hypotheses against fixed examples over a precomputed background model.
class CoverageTester {
public:
    CoverageTester(const Background& bk, std::vector<Atom> pos, std::vector<Atom> neg, EvalLimits limits = {});

    CoverageRecord test(const Program& h) const;
    CoverageRecord test_rules(const std::vector<Rule>& rules, Predicate target) const;
    // Same answer via a full fixpoint; the reference for test().
    CoverageRecord test_bottom_up(const Program& h) const;
    // Bits of the examples entailed by a derived store.
    Bitset entailed(const FactStore& derived, const std::vector<Atom>& examples) const;

    const FactStore& model() const { return model_; }
    const std::vector<Atom>& pos() const { return pos_; }
    const std::vector<Atom>& neg() const { return neg_; }

private:
    void check_bias(const std::vector<Rule>& rules) const;
    static bool flat(const std::vector<Rule>& rules);
    Bitset entailed_flat(const std::vector<Rule>& rules, const std::vector<Atom>& examples) const;

    FactStore model_;
    std::vector<Atom> pos_;
    std::vector<Atom> neg_;
    std::vector<Predicate> bk_body_preds_;
    EvalLimits limits_;
};

CoverageRecord coverage(const Program& h, const Background& bk, const std::vector<Atom>& pos,
                        const std::vector<Atom>& neg);

} // namespace rulejoin
