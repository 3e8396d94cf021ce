#include "rulejoin/taskgen.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include "rulejoin/combine.hpp"

namespace rulejoin {

namespace {

const std::vector<std::string> kColours = {
    "blue",  "red",   "green",  "yellow", "white", "black", "orange", "purple", "pink",   "brown", "grey",
    "cyan",  "magenta", "violet", "indigo", "teal", "olive", "maroon", "navy",  "beige", "gold",  "silver"};

const std::vector<std::string> kLetters = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};

// Raw modulo keeps the stream identical across standard libraries.
std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[pick(rng, i)]);
}

Atom unary(std::string_view p, std::string_view c) { return Atom(Predicate(p, 1), {Term::constant(c)}); }
Atom binary(std::string_view p, std::string_view a, std::string_view b) {
    return Atom(Predicate(p, 2), {Term::constant(a), Term::constant(b)});
}

Rule rule(Atom head, std::vector<Atom> body) { return Rule{std::move(head), std::move(body)}; }
Atom vatom(std::string_view p, std::vector<std::uint32_t> vars) {
    std::vector<Term> args;
    for (auto v : vars) args.push_back(Term::var(v));
    Predicate pred(p, static_cast<std::uint32_t>(args.size()));
    return Atom(pred, std::move(args));
}

void finish(GeneratedTask& g) {
    g.planted_cost = 0;
    for (const auto& m : g.planted_members) g.planted_cost += program_cost(m);
    g.planted = reify_conjunction(g.planted_members, g.train.bias.head);
    g.train.validate();
}

} // namespace

GeneratedTask gen_zendo(int k, int n_train, int n_test, std::uint64_t seed) {
    if (k < 3 || k % 3 != 0) throw std::invalid_argument("zendo tasks need k = 3m with m >= 1");
    const std::size_t m = static_cast<std::size_t>(k / 3);
    if (m + 2 > kColours.size()) throw std::invalid_argument("zendo k too large for the colour palette");
    if (n_train < 2 * static_cast<int>(m) || n_test < 2) throw std::invalid_argument("too few zendo examples");

    std::mt19937_64 rng(seed);
    std::vector<std::string> colours = kColours;
    shuffle(colours, rng);
    std::vector<std::string> required(colours.begin(), colours.begin() + static_cast<std::ptrdiff_t>(m));

    GeneratedTask g;
    Bias& b = g.train.bias;
    b.head = Predicate("zendo", 1);
    b.body.push_back(Predicate("piece", 2));
    for (const auto& c : kColours) b.body.emplace_back(c, 1);
    std::sort(b.body.begin(), b.body.end());
    b.max_vars = static_cast<int>(m) + 1;
    b.max_body = 2 * static_cast<int>(m);
    b.max_rules = 1;

    std::size_t scene_id = 0;
    std::size_t missing_cursor = 0;
    auto make_scene = [&](bool positive, std::string_view prefix) {
        std::string scene = std::string(prefix) + std::to_string(scene_id++);
        std::vector<std::string> cols = required;
        std::string missing;
        if (!positive) {
            std::size_t drop = missing_cursor++ % m;
            missing = cols[drop];
            cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(drop));
        }
        std::size_t extra = pick(rng, 4);
        for (std::size_t i = 0; i < extra; ++i) {
            std::string c;
            do c = kColours[pick(rng, kColours.size())];
            while (c == missing);
            cols.push_back(c);
        }
        shuffle(cols, rng);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            std::string piece = scene + "_p" + std::to_string(i);
            g.train.bk.facts.add(binary("piece", scene, piece));
            g.train.bk.facts.add(unary(cols[i], piece));
        }
        return unary("zendo", scene);
    };

    for (int i = 0; i < n_train; ++i) {
        bool positive = i % 2 == 0;
        (positive ? g.train.pos : g.train.neg).push_back(make_scene(positive, "s"));
    }
    for (int i = 0; i < n_test; ++i) {
        bool positive = i % 2 == 0;
        (positive ? g.test_pos : g.test_neg).push_back(make_scene(positive, "t"));
    }

    for (const auto& c : required)
        g.planted_members.push_back(
            Program::make({rule(vatom("zendo", {0}), {vatom("piece", {0, 1}), vatom(c, {1})})}));
    std::sort(g.planted_members.begin(), g.planted_members.end());
    finish(g);
    return g;
}

GeneratedTask gen_string(int k, int n_train, int n_test, std::uint64_t seed) {
    if (k < 8 || (k - 1) % 7 != 0) throw std::invalid_argument("string tasks need k = 1 + 7n with n >= 1");
    const std::size_t n = static_cast<std::size_t>((k - 1) / 7);
    if (n + 2 > kLetters.size()) throw std::invalid_argument("string k too large for the alphabet");
    if (n_train < 2 * static_cast<int>(n) || n_test < 2) throw std::invalid_argument("too few string examples");

    std::mt19937_64 rng(seed);
    std::vector<std::string> letters = kLetters;
    shuffle(letters, rng);
    std::vector<std::string> required(letters.begin(), letters.begin() + static_cast<std::ptrdiff_t>(n));

    GeneratedTask g;
    Bias& b = g.train.bias;
    b.head = Predicate("f", 1);
    b.body = {Predicate("head", 2), Predicate("tail", 2)};
    for (const auto& l : kLetters) b.body.emplace_back("is_" + l, 1);
    std::sort(b.body.begin(), b.body.end());
    b.max_vars = 2;
    b.max_body = 2;
    b.max_rules = 2;
    b.enable_recursion = true;

    ListTable lists;
    std::set<std::vector<std::string>> seen;
    std::size_t missing_cursor = 0;
    auto make_list = [&](bool positive) {
        for (;;) {
            std::vector<std::string> s = required;
            std::string missing;
            if (!positive) {
                std::size_t drop = missing_cursor % n;
                missing = s[drop];
                s.erase(s.begin() + static_cast<std::ptrdiff_t>(drop));
            }
            std::size_t extra = 2 + pick(rng, 4);
            for (std::size_t i = 0; i < extra; ++i) {
                std::string l;
                do l = kLetters[pick(rng, kLetters.size())];
                while (l == missing);
                s.push_back(l);
            }
            shuffle(s, rng);
            if (!seen.insert(s).second) continue;
            if (!positive) ++missing_cursor;
            std::vector<Term> elems;
            for (const auto& l : s) elems.push_back(Term::constant(l));
            return Atom(Predicate("f", 1), {Term::constant(lists.intern(elems))});
        }
    };

    for (int i = 0; i < n_train; ++i) {
        bool positive = i % 2 == 0;
        (positive ? g.train.pos : g.train.neg).push_back(make_list(positive));
    }
    for (int i = 0; i < n_test; ++i) {
        bool positive = i % 2 == 0;
        (positive ? g.test_pos : g.test_neg).push_back(make_list(positive));
    }
    lists.add_facts(g.train.bk.facts);
    for (const auto& l : kLetters) g.train.bk.facts.add(unary("is_" + l, l));

    for (const auto& l : required)
        g.planted_members.push_back(
            Program::make({rule(vatom("f", {0}), {vatom("head", {0, 1}), vatom("is_" + l, {1})}),
                           rule(vatom("f", {0}), {vatom("tail", {0, 1}), vatom("f", {1})})}));
    std::sort(g.planted_members.begin(), g.planted_members.end());
    finish(g);
    return g;
}

GeneratedTask gen_task(std::string_view family, int k, int n_train, int n_test, std::uint64_t seed) {
    if (family == "zendo") return gen_zendo(k, n_train, n_test, seed);
    if (family == "string") return gen_string(k, n_train, n_test, seed);
    throw std::invalid_argument("unknown task family " + std::string(family));
}

void write_generated(const std::filesystem::path& dir, const GeneratedTask& t) {
    write_file(dir / "bk.pl", print_background(t.train.bk));
    write_file(dir / "exs.pl", print_examples(t.train.pos, t.train.neg));
    write_file(dir / "bias.pl", print_bias(t.train.bias));
    write_file(dir / "test_exs.pl", print_examples(t.test_pos, t.test_neg));
    std::string planted;
    for (const auto& r : t.planted.rules) planted += print_rule(r) + "\n";
    write_file(dir / "planted.pl", planted);
}

} // namespace rulejoin
