#pragma once

// Function-free definite clauses: terms, atoms, rules and programs, plus the
// syntactic analyses the learner relies on (canonical forms, size,
// theta-subsumption, splittability, separability, recursion).

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rulejoin/symbol.hpp"

namespace rulejoin {

struct Predicate {
    Symbol name;
    std::uint32_t arity = 0;

    Predicate() = default;
    Predicate(Symbol n, std::uint32_t a) : name(n), arity(a) {}
    Predicate(std::string_view n, std::uint32_t a) : name(Symbol::intern(n)), arity(a) {}

    std::uint64_t key() const { return (std::uint64_t{name.id()} << 8) | arity; }

    friend bool operator==(const Predicate&, const Predicate&) = default;
    friend std::strong_ordering operator<=>(const Predicate& a, const Predicate& b) {
        if (auto c = a.name <=> b.name; c != 0) return c;
        return a.arity <=> b.arity;
    }
};

struct Term {
    enum class Kind : std::uint8_t { Var, Const };

    Kind kind = Kind::Var;
    std::uint32_t value = 0;  // variable index or constant symbol id

    static Term var(std::uint32_t index) { return {Kind::Var, index}; }
    static Term constant(Symbol s) { return {Kind::Const, s.id()}; }
    static Term constant(std::string_view s) { return constant(Symbol::intern(s)); }

    bool is_var() const { return kind == Kind::Var; }
    Symbol symbol() const { return Symbol::from_id(value); }

    friend bool operator==(const Term&, const Term&) = default;
    // Variables sort before constants; constants by name.
    friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
        if (a.kind != b.kind) return a.kind == Kind::Var ? std::strong_ordering::less : std::strong_ordering::greater;
        if (a.is_var()) return a.value <=> b.value;
        return a.symbol() <=> b.symbol();
    }
};

struct Atom {
    Predicate pred;
    std::vector<Term> args;

    Atom() = default;
    Atom(Predicate p, std::vector<Term> a);

    bool is_ground() const;

    friend bool operator==(const Atom&, const Atom&) = default;
    friend std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
        if (auto c = a.pred <=> b.pred; c != 0) return c;
        return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
    }
};

struct Rule {
    Atom head;
    std::vector<Atom> body;

    // Variables occurring in the rule, as a bitmask over indices < 64.
    std::uint64_t var_mask() const;
    std::uint64_t head_var_mask() const;
    std::uint32_t num_vars() const;
    bool is_safe() const;
    bool is_recursive() const;  // head predicate occurs in the body
    int size() const { return 1 + static_cast<int>(body.size()); }

    friend bool operator==(const Rule&, const Rule&) = default;
    friend std::strong_ordering operator<=>(const Rule& a, const Rule& b) {
        if (auto c = a.head <=> b.head; c != 0) return c;
        if (a.body.size() != b.body.size()) return a.body.size() <=> b.body.size();
        return std::lexicographical_compare_three_way(a.body.begin(), a.body.end(), b.body.begin(), b.body.end());
    }
};

struct Program {
    std::vector<Rule> rules;
    Predicate target;

    Program() = default;
    Program(std::vector<Rule> rs, Predicate t) : rules(std::move(rs)), target(t) {}

    // Canonicalizes every rule, sorts and deduplicates. The target defaults to
    // the head predicate of the first rule.
    static Program make(std::vector<Rule> rules);
    static Program make(std::vector<Rule> rules, Predicate target);

    friend bool operator==(const Program& a, const Program& b) { return a.rules == b.rules; }
    friend std::strong_ordering operator<=>(const Program& a, const Program& b) {
        if (a.rules.size() != b.rules.size()) return a.rules.size() <=> b.rules.size();
        return std::lexicographical_compare_three_way(a.rules.begin(), a.rules.end(), b.rules.begin(), b.rules.end());
    }
};

class UnsafeRule : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Renames variables by first occurrence (head, then body) and sorts the body,
// choosing the lexicographically least form over all variable renamings.
// Duplicate body atoms are dropped. Throws UnsafeRule.
Rule canonicalize(const Rule& r);

int rule_cost(const Rule& r);
int program_cost(const Program& h);

bool theta_subsumes(const Rule& general, const Rule& specific);
// True iff every rule of h is subsumed by some rule of g (h specialises g).
bool theta_subsumes(const Program& g, const Program& h);

// Bitmask of body-only variables per body atom.
std::vector<std::uint64_t> body_only_masks(const Rule& r);
// Connected components of body atoms linked by shared body-only variables.
// Atoms without body-only variables are singleton components.
std::vector<std::vector<std::size_t>> body_components(const Rule& r);

bool is_splittable_rule(const Rule& r);
bool is_splittable_program(const Program& h);
// True iff some body atom mentions only head variables (or no variables) and
// the body has at least two atoms.
bool has_head_only_atom(const Rule& r);

// Factor rules, one per body component. Throws std::invalid_argument for
// recursive rules.
std::vector<Rule> split_rule(const Rule& r);

bool is_separable(const Program& h);
bool is_recursive(const Program& h);

std::string to_string(const Term& t);
std::string to_string(const Atom& a);
std::string to_string(const Rule& r);
std::string to_string(const Program& h);

struct ProgramHash {
    std::size_t operator()(const Program& h) const noexcept;
};
struct RuleHash {
    std::size_t operator()(const Rule& r) const noexcept;
};

} // namespace rulejoin
