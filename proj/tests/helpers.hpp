#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rulejoin/logic.hpp"
#include "rulejoin/task.hpp"

namespace rulejoin::testing {

inline std::filesystem::path data_dir() { return RULEJOIN_TEST_DATA; }

inline Rule rule(std::string_view text) {
    Clauses c = parse_clauses(text);
    if (c.rules.size() == 1) return c.rules.front();
    return Rule{c.facts.at(0), {}};
}

inline Program program(std::string_view text) { return parse_program(text); }

// Blank-line separated programs.
inline std::vector<Program> programs(const std::string& text) {
    std::vector<Program> out;
    std::string chunk;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find("\n\n", start);
        if (end == std::string::npos) end = text.size();
        chunk = text.substr(start, end - start);
        std::string stripped;
        for (std::size_t i = 0; i < chunk.size();) {
            std::size_t nl = chunk.find('\n', i);
            if (nl == std::string::npos) nl = chunk.size();
            std::string line = chunk.substr(i, nl - i);
            if (!line.empty() && line[0] != '%') stripped += line + "\n";
            i = nl + 1;
        }
        if (stripped.find_first_not_of(" \n") != std::string::npos) out.push_back(parse_program(stripped));
        start = end + 2;
    }
    return out;
}

inline TaskSpec load(const std::string& name) {
    auto d = data_dir() / name;
    return parse_task(d / "bk.pl", d / "exs.pl", d / "bias.pl");
}

struct RandomRules {
    std::vector<Predicate> preds;
    Predicate head{"f", 1};
    int max_vars = 4;
    int max_body = 4;

    // A safe rule; body atoms drawn uniformly, duplicates allowed.
    Rule draw(std::mt19937_64& rng, bool allow_head = false) const {
        for (;;) {
            std::size_t n = 1 + rng() % static_cast<std::size_t>(max_body);
            std::vector<Term> hargs;
            for (std::uint32_t i = 0; i < head.arity; ++i) hargs.push_back(Term::var(i));
            Rule r{Atom(head, hargs), {}};
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t np = preds.size() + (allow_head ? 1 : 0);
                Predicate p = rng() % np < preds.size() ? preds[rng() % preds.size()] : head;
                std::vector<Term> args;
                for (std::uint32_t a = 0; a < p.arity; ++a)
                    args.push_back(Term::var(static_cast<std::uint32_t>(rng() % static_cast<std::size_t>(max_vars))));
                r.body.push_back(Atom(p, args));
            }
            if (r.is_safe()) return r;
        }
    }
};

} // namespace rulejoin::testing
