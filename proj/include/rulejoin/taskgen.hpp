#pragma once

// Synthetic scaling tasks with a planted conjunction of known cost.
//
// zendo:  k = 3m. Scenes hold coloured pieces; a scene is positive iff it has
//         a piece of each of m required colours. Optimum: m programs
//         zendo(A) :- piece(A,B), colour_i(B).
// string: k = 1 + 7n. Lists over a small alphabet; a list is positive iff it
//         contains each of n required letters. Optimum: n recursive programs
//         f(A) :- head(A,B), is_x(B).  f(A) :- tail(A,B), f(B).
//         k counts the reified form: n*6 member literals plus a linking rule
//         of 1+n literals.

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "rulejoin/task.hpp"

namespace rulejoin {

struct GeneratedTask {
    TaskSpec train;
    std::vector<Atom> test_pos;
    std::vector<Atom> test_neg;
    std::vector<Program> planted_members;
    Program planted;       // reified conjunction
    int planted_cost = 0;  // sum of member costs
};

GeneratedTask gen_zendo(int k, int n_train, int n_test, std::uint64_t seed);
GeneratedTask gen_string(int k, int n_train, int n_test, std::uint64_t seed);
GeneratedTask gen_task(std::string_view family, int k, int n_train, int n_test, std::uint64_t seed);

// Writes bk.pl, exs.pl, bias.pl, test_exs.pl and planted.pl into dir.
void write_generated(const std::filesystem::path& dir, const GeneratedTask& t);

} // namespace rulejoin
