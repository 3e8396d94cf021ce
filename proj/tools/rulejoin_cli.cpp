#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "rulejoin/learner.hpp"
#include "rulejoin/task.hpp"
#include "rulejoin/taskgen.hpp"

using namespace rulejoin;

namespace {

int run_learn(const std::string& bk, const std::string& exs, const std::string& bias, LearnOptions opt,
              const std::string& stats_path) {
    TaskSpec task = parse_task(bk, exs, bias);
    opt.progress = [](const std::string& m) { std::cerr << "[rulejoin] " << m << "\n"; };
    LearnResult r = learn(task, opt);
    if (r.program) {
        for (const auto& rule : r.program->rules) std::cout << print_rule(rule) << "\n";
        std::cerr << "[rulejoin] cost=" << *r.stats.solution_cost << (r.optimal ? " optimal" : " not proven optimal")
                  << "\n";
    } else {
        std::cerr << "[rulejoin] no solution\n";
    }
    if (!stats_path.empty()) write_file(stats_path, to_json(r.stats) + "\n");
    return r.program ? 0 : 2;
}

int run_eval(const std::string& program, const std::string& bk, const std::string& exs) {
    ListTable lists;
    Clauses c = parse_clauses(read_file(bk), &lists);
    Background b;
    for (const auto& f : c.facts) b.facts.add(f);
    b.rules = c.rules;
    Examples e = parse_examples(read_file(exs), &lists);
    lists.add_facts(b.facts);
    std::optional<Program> h;
    std::string text = read_file(program);
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) h = parse_program(text);
    std::cout << evaluate(h, b, e.pos, e.neg) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rulejoin: learn logic programs from examples"};
    app.require_subcommand(1);

    auto* learn_cmd = app.add_subcommand("learn", "learn a program for a task");
    std::string bk, exs, bias, stats_path;
    LearnOptions opt;
    learn_cmd->add_option("--bk", bk, "background knowledge file")->required();
    learn_cmd->add_option("--exs", exs, "examples file")->required();
    learn_cmd->add_option("--bias", bias, "bias file")->required();
    learn_cmd->add_option("--timeout", opt.timeout_s, "wall-clock limit in seconds");
    learn_cmd->add_option("--max-size", opt.max_size, "upper bound on program cost");
    learn_cmd->add_flag("--disable-join", opt.disable_join, "skip the join stage");
    learn_cmd->add_flag("--allow-splittable", opt.allow_splittable, "generate splittable rules too");
    learn_cmd->add_option("--stats", stats_path, "write run statistics as JSON");
    learn_cmd->add_option("--seed", opt.seed, "seed recorded in the statistics");
    learn_cmd->add_flag("--verbose", opt.verbose, "report every tested program");

    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic task");
    std::string family, out;
    int k = 0, n_train = 40, n_test = 200;
    std::uint64_t seed = 0;
    gen_cmd->add_option("family", family, "zendo or string")->required()->check(CLI::IsMember({"zendo", "string"}));
    gen_cmd->add_option("--k", k, "planted solution size")->required();
    gen_cmd->add_option("--train", n_train, "training examples");
    gen_cmd->add_option("--test", n_test, "test examples");
    gen_cmd->add_option("--seed", seed, "random seed");
    gen_cmd->add_option("--out", out, "output directory")->required();

    auto* eval_cmd = app.add_subcommand("eval", "score a program on examples");
    std::string program;
    eval_cmd->add_option("--program", program, "program file")->required();
    eval_cmd->add_option("--bk", bk, "background knowledge file")->required();
    eval_cmd->add_option("--exs", exs, "examples file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*learn_cmd) return run_learn(bk, exs, bias, opt, stats_path);
        if (*gen_cmd) {
            GeneratedTask t = gen_task(family, k, n_train, n_test, seed);
            std::filesystem::create_directories(out);
            write_generated(out, t);
            return 0;
        }
        if (*eval_cmd) return run_eval(program, bk, exs);
    } catch (const ParseError& e) {
        std::cerr << "parse error at " << e.line() << ":" << e.column() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
