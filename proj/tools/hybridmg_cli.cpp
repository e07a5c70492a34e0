#include "hybridmg/error.hpp"
#include "hybridmg/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace hybridmg;

namespace {

std::ostream& output(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw Error("cannot write '" + path + "'");
    return file;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multigrid experiments for hybridized finite element trace systems"};
    app.require_subcommand(1);

    std::string config, out_path;
    bool deterministic = false, strict = false, table = false;

    auto* run = app.add_subcommand("run", "iteration counts over the configured (p, levels) sweep");
    run->add_option("config", config, "experiment config file")->required()->check(CLI::ExistingFile);
    run->add_option("-o,--output", out_path, "CSV destination (default stdout)");
    run->add_flag("--deterministic", deterministic, "write 0 in the seconds column");
    run->add_flag("--strict", strict, "exit with status 2 when any cell fails to converge");
    run->add_flag("--table", table, "also print the iteration grid to stderr");

    auto* converge = app.add_subcommand("converge", "L2 error and observed order under refinement");
    converge->add_option("config", config, "experiment config file")->required()->check(CLI::ExistingFile);
    converge->add_option("-o,--output", out_path, "CSV destination (default stdout)");

    auto* dump = app.add_subcommand("dump-hierarchy", "macro-element membership per level as CSV");
    dump->add_option("config", config, "experiment config file")->required()->check(CLI::ExistingFile);
    dump->add_option("-o,--output", out_path, "CSV destination (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg = load_experiment_config(config);
        std::ofstream file;
        std::ostream& out = output(out_path, file);
        if (*run) {
            const auto rows = run_experiment(cfg);
            write_result_csv(out, rows, deterministic);
            if (table) write_result_table(std::cerr, rows);
            if (strict)
                for (const auto& r : rows)
                    if (r.status != SolveStatus::Converged) return 2;
        } else if (*converge) {
            write_convergence_csv(out, run_convergence(cfg));
        } else if (*dump) {
            write_hierarchy_csv(out, cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
