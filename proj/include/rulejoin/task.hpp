#pragma once

// Task files: background knowledge, examples and bias in a Prolog-like syntax.
//
//   bk    one ground fact or definite rule per statement
//   exs   pos(atom). / neg(atom).
//   bias  head_pred(name,arity). body_pred(name,arity). max_vars(n).
//         max_body(n). max_rules(n). enable_recursion(true|false).
//         constant(pred,argpos,symbol).      argpos counts from 0
//
// `%` starts a comment. A list term [a,b,c] denotes a constant named by its
// text; the loader adds head/2 and tail/2 facts for it and its suffixes.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rulejoin/datalog.hpp"
#include "rulejoin/generator.hpp"
#include "rulejoin/logic.hpp"

namespace rulejoin {

class ParseError : public std::invalid_argument {
public:
    ParseError(const std::string& msg, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// List constants seen while parsing, with their elements.
class ListTable {
public:
    Symbol intern(const std::vector<Term>& elements);
    void add_facts(FactStore& facts) const;
    bool empty() const { return lists_.empty(); }

private:
    std::map<Symbol, std::vector<Term>> lists_;
};

struct Clauses {
    std::vector<Atom> facts;
    std::vector<Rule> rules;
};

Clauses parse_clauses(std::string_view text, ListTable* lists = nullptr);
Program parse_program(std::string_view text, std::optional<Predicate> target = std::nullopt);

struct Examples {
    std::vector<Atom> pos;
    std::vector<Atom> neg;
};

Examples parse_examples(std::string_view text, ListTable* lists = nullptr);
Bias parse_bias(std::string_view text);

struct TaskSpec {
    Background bk;
    std::vector<Atom> pos;
    std::vector<Atom> neg;
    Bias bias;

    // Throws std::invalid_argument / BiasViolation on malformed tasks.
    void validate() const;
};

TaskSpec parse_task_text(std::string_view bk, std::string_view exs, std::string_view bias);
TaskSpec parse_task(const std::filesystem::path& bk, const std::filesystem::path& exs,
                    const std::filesystem::path& bias);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& text);

// Printers produce text accepted by the parsers above.
std::string print_term(const Term& t);
std::string print_atom(const Atom& a);
std::string print_rule(const Rule& r);
std::string print_background(const Background& bk);
std::string print_examples(const std::vector<Atom>& pos, const std::vector<Atom>& neg);
std::string print_bias(const Bias& b);

// Sorted ground facts of a store.
std::vector<Atom> facts_of(const FactStore& s);

// Fraction of correctly classified atoms; an absent program predicts negative.
double evaluate(const std::optional<Program>& h, const Background& bk, const std::vector<Atom>& pos,
                const std::vector<Atom>& neg);

} // namespace rulejoin
