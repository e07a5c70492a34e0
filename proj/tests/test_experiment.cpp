#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridmg/error.hpp"
#include "hybridmg/experiment.hpp"

#include <cmath>
#include <sstream>

using namespace hybridmg;
using doctest::Approx;

namespace {

ExperimentConfig from_text(const std::string& text) {
    std::istringstream in(text);
    return experiment_config(ConfigFile::parse(in));
}

// Message of the ConfigError raised by `text`, or "" when none is raised.
std::string config_error(const std::string& text) {
    try {
        from_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("config file syntax") {
    std::istringstream in("# comment\n[problem]\nexample = example3  # trailing\n\n[method]\norders = 1..3, 5\n");
    const ConfigFile f = ConfigFile::parse(in);
    CHECK(f.get("problem.example", "") == "example3");
    CHECK(f.get_int_list("method.orders", {}) == std::vector<int>{1, 2, 3, 5});
    CHECK(f.get_int("missing.key", 7) == 7);
    CHECK(f.keys().size() == 2);

    auto line_of = [](const std::string& text) {
        std::istringstream s(text);
        try {
            ConfigFile::parse(s);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("[a]\nx = 1\nx = 2\n") == 3);
    CHECK(line_of("[a]\njust words\n") == 2);
    CHECK(line_of("[a\n") == 1);
    CHECK(line_of("[a]\n = 3\n") == 2);
}

TEST_CASE("configuration errors name the offending key") {
    CHECK(config_error("[problem]\nexampel = example1\n").find("problem.exampel") != std::string::npos);
    CHECK(config_error("[problem]\nexample = example5\n").find("problem.example") != std::string::npos);
    CHECK(config_error("[method]\nscheme = dg\n").find("method.scheme") != std::string::npos);
    CHECK(config_error("[method]\norders = one\n").find("method.orders") != std::string::npos);
    CHECK(config_error("[method]\norders = 0\n").find("method.orders") != std::string::npos);
    CHECK(config_error("[method]\ntau_scale = -1\n").find("method.tau_scale") != std::string::npos);
    CHECK(config_error("[multigrid]\nlevels = 1\n").find("multigrid.levels") != std::string::npos);
    CHECK(config_error("[multigrid]\nsmoother = gauss\n").find("multigrid.smoother") != std::string::npos);
    CHECK(config_error("[multigrid]\nsteps = 0\n").find("multigrid.steps") != std::string::npos);
    CHECK(config_error("[multigrid]\nlocal_correction = maybe\n").find("multigrid.local_correction") !=
          std::string::npos);
    CHECK(config_error("[solver]\nmodes = cg\n").find("solver.modes") != std::string::npos);
    CHECK(config_error("[solver]\ntol = 0\n").find("solver.tol") != std::string::npos);
    CHECK(config_error("[problem]\nexample = example2\nseeds = 0.5\n").find("problem.seeds") != std::string::npos);
    CHECK(config_error("[problem]\nexample = example2\nmesh = nowhere.msh\n").find("problem.mesh") !=
          std::string::npos);
    CHECK(config_error("[method]\nscheme = rt\norders = 2\n").find("method.orders") != std::string::npos);
}

TEST_CASE("default stabilization follows the scheme and example") {
    CHECK(from_text("").tau.rule == TauRule::InvHmin);
    CHECK(from_text("[method]\nscheme = nipg\n").tau.rule == TauRule::Ipdg);
    CHECK(from_text("[problem]\nexample = example3\n").tau.rule == TauRule::KappaInvHmin);
    CHECK(from_text("[problem]\nexample = example4\n[method]\nscheme = sipg\n").tau.rule == TauRule::KappaIpdg);
    CHECK(from_text("[method]\ntau = constant\ntau_scale = 4\n").tau.value(1, 0.1, 1.0) == 4.0);
}

TEST_CASE("snapped checkerboard interface") {
    CHECK(snapped_split(4) == 0.5);
    CHECK(snapped_split(8) == 0.5);
    CHECK(snapped_split(16) == 0.5625);
    CHECK(snapped_split(32) == 0.5625);
    CHECK(snapped_split(100) == Approx(0.56));
    for (int n : {4, 8, 16, 32, 64}) {
        const double s = snapped_split(n);
        CHECK(std::abs(s * n - std::round(s * n)) < 1e-12);
        CHECK(std::abs(s - 0.56) <= 0.5 / n + 1e-12);
    }
}

TEST_CASE("example instances") {
    const ExperimentConfig cfg = from_text("[problem]\nexample = example4\n");
    const ExampleInstance a = make_instance(cfg, 1, 3);
    CHECK(a.mesh->num_elements() == 64);
    CHECK(a.split == 0.5);
    CHECK(a.hierarchy.num_levels() == 3);
    // kappa jumps across the snapped interface
    CHECK(a.problem.kappa_at({0.25, 0.25}) != a.problem.kappa_at({0.75, 0.25}));
    CHECK(a.problem.kappa_at({0.25, 0.25}) == a.problem.kappa_at({0.75, 0.75}));

    const ExampleInstance disk = make_instance(from_text("[problem]\nexample = example3\n"), 1, 3);
    CHECK(disk.hierarchy.level(1).num_macros == 4);

    const ExampleInstance mixed = make_instance(from_text("[problem]\nexample = example6\n"), 1, 3, false);
    CHECK(mixed.hierarchy.num_levels() == 0);
    const auto schemes = resolve_schemes(*mixed.mesh, mixed.method);
    CHECK(std::count(schemes.begin(), schemes.end(), Scheme::RT) > 0);
    CHECK(std::count(schemes.begin(), schemes.end(), Scheme::NIPG) > 0);
}

TEST_CASE("sweeps") {
    SUBCASE("an empty order list yields an empty table") {
        ExperimentConfig cfg = from_text("");
        cfg.orders.clear();
        const auto rows = run_experiment(cfg);
        CHECK(rows.empty());
        std::ostringstream out;
        write_result_csv(out, rows, true);
        CHECK(out.str() == "p,levels,mode,iters,status,residual,seconds\n");
    }
    SUBCASE("rows are ordered and deterministic") {
        const ExperimentConfig cfg = from_text("[method]\norders = 1, 2\n[multigrid]\nlevels = 2..3\n");
        const auto rows = run_experiment(cfg);
        REQUIRE(rows.size() == 8);
        CHECK(rows[0].order == 1);
        CHECK(rows[0].levels == 2);
        CHECK(rows[0].mode == SolveMode::MG);
        CHECK(rows[1].mode == SolveMode::GmresMG);
        CHECK(rows[7].order == 2);
        CHECK(rows[7].levels == 3);
        for (const auto& r : rows) {
            CHECK(r.status == SolveStatus::Converged);
            CHECK(r.residual <= 1e-9);
        }
        std::ostringstream a, b;
        write_result_csv(a, rows, true);
        write_result_csv(b, run_experiment(cfg), true);
        CHECK(a.str() == b.str());
    }
    SUBCASE("non-converged cells are starred in the table") {
        ExperimentConfig cfg = from_text("[multigrid]\nlevels = 3\n[solver]\nmodes = mg\nmaxit = 1\n");
        const auto rows = run_experiment(cfg);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].status == SolveStatus::MaxIter);
        std::ostringstream out;
        write_result_table(out, rows);
        CHECK(out.str().find('*') != std::string::npos);
    }
}

TEST_CASE("convergence study") {
    const ExperimentConfig cfg = from_text("[problem]\nexample = linear\n[method]\norders = 1\n[multigrid]\nlevels = 2..3\n");
    const auto rows = run_convergence(cfg);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) CHECK(r.error < 1e-10);
    CHECK(rows[0].cells == 4);
    CHECK(rows[1].h == Approx(0.125));
    CHECK(std::isnan(rows[0].rate));

    const ExperimentConfig smooth = from_text("[method]\norders = 1\n[multigrid]\nlevels = 2..4\n");
    const auto r = run_convergence(smooth);
    CHECK(r.back().rate == Approx(2.0).epsilon(0.1));
    CHECK_THROWS_AS(run_convergence(from_text("[problem]\nexample = example2\n")), ConfigError);
}

TEST_CASE("hierarchy dump") {
    std::ostringstream out;
    write_hierarchy_csv(out, from_text("[multigrid]\nlevels = 2\n"));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "levels,level,element,macro");
    int count = 0;
    while (std::getline(in, line)) ++count;
    CHECK(count == 2 * 16);
}
