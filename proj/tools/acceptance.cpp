// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "hybridmg/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hybridmg;

namespace {

using Table = std::vector<std::vector<int>>; // [p index][level index]

// Reference iteration counts for levels 2..5.
const Table kBlockJacobiMG{{7, 7, 8, 8}, {6, 7, 8, 8}, {8, 9, 9, 9}, {9, 10, 10, 10}};
const Table kBlockJacobiGmres{{4, 5, 6, 6}, {4, 5, 6, 6}, {6, 6, 6, 6}, {6, 7, 7, 7}};
const Table kLusgsMG{{5, 5, 5, 5}, {5, 5, 5, 5}, {5, 6, 6, 6}, {6, 6, 6, 6}};
const Table kLusgsGmres{{4, 4, 4, 5}, {4, 4, 4, 4}, {5, 5, 5, 5}, {5, 5, 5, 5}};
const Table kJacobiMG{{14, 14, 14, 15}, {14, 14, 15, 15}, {15, 16, 16, 16}, {19, 19, 19, 19}};
const Table kJacobiGmres{{6, 8, 8, 8}, {8, 8, 8, 8}, {8, 9, 9, 9}, {9, 10, 10, 9}};
const std::vector<int> kTau1LusgsP1{6, 11, 21, 40};
const Table kTau1BlockJacobiMG{{9, 10, 10, 10}, {11, 11, 12, 12}};
const Table kTau1BlockJacobiGmres{{6, 7, 7, 7}, {6, 7, 7, 8}};
const Table kCheckerboardGmres{{2, 5, 5, 5}, {3, 4, 5, 5}};

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s  criterion %-2d %s: %s\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

ExperimentConfig example1(SmootherKind smoother) {
    ExperimentConfig cfg;
    cfg.example = Example::Example1;
    cfg.scheme = Scheme::HDG;
    cfg.tau = {TauRule::InvHmin, 1.0};
    cfg.orders = {1, 2, 3, 4};
    cfg.levels = {2, 3, 4, 5};
    cfg.mg.smoother.kind = smoother;
    cfg.modes = {SolveMode::MG, SolveMode::GmresMG};
    return cfg;
}

using Grid = std::map<std::tuple<int, int, SolveMode>, ResultRow>;

Grid to_grid(const std::vector<ResultRow>& rows) {
    Grid g;
    for (const auto& r : rows) g[{r.order, r.levels, r.mode}] = r;
    return g;
}

std::string cell(const ResultRow& r) {
    return r.status == SolveStatus::Converged ? std::to_string(r.iterations) : status_name(r.status);
}

// Compares converged counts against a table with an absolute tolerance; lists offending cells.
bool within(const Grid& g, const ExperimentConfig& cfg, SolveMode mode, const Table& expected, int tol,
            std::ostringstream& bad, int& worst) {
    bool ok = true;
    for (std::size_t i = 0; i < cfg.orders.size(); ++i)
        for (std::size_t j = 0; j < cfg.levels.size(); ++j) {
            const ResultRow& r = g.at({cfg.orders[i], cfg.levels[j], mode});
            const int dev = r.status == SolveStatus::Converged ? std::abs(r.iterations - expected[i][j]) : 1000;
            worst = std::max(worst, dev);
            if (dev > tol) {
                ok = false;
                bad << ' ' << mode_name(mode) << " p" << cfg.orders[i] << "/L" << cfg.levels[j] << '=' << cell(r)
                    << "(expected " << expected[i][j] << ')';
            }
        }
    return ok;
}

bool regression(const ExperimentConfig& cfg, const Table& mg, const Table& gm, std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g = to_grid(run_experiment(cfg));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream bad;
    int worst = 0;
    const bool a = within(g, cfg, SolveMode::MG, mg, 2, bad, worst);
    const bool b = within(g, cfg, SolveMode::GmresMG, gm, 2, bad, worst);
    std::ostringstream d;
    d << "max deviation " << worst << ", sweep " << std::fixed;
    d.precision(1);
    d << secs << " s";
    if (!(a && b)) d << ";" << bad.str();
    detail = d.str();
    return a && b && secs < 300.0;
}

void criterion1() {
    std::string detail;
    const bool ok = regression(example1(SmootherKind::BlockJacobi), kBlockJacobiMG, kBlockJacobiGmres, detail);
    report(1, ok, "example1 block-Jacobi counts within +-2, p 1-4, levels 2-5", detail);
}

void criterion2() {
    std::string a, b;
    const bool lu = regression(example1(SmootherKind::LUSGS), kLusgsMG, kLusgsGmres, a);
    ExperimentConfig jc = example1(SmootherKind::DampedJacobi);
    const bool ja = regression(jc, kJacobiMG, kJacobiGmres, b);
    report(2, lu && ja, "example1 LU-SGS and damped Jacobi counts within +-2",
           "lusgs " + std::string(lu ? "ok" : "off") + " (" + a + "); jacobi " + (ja ? "ok" : "off") + " (" + b + ")");
}

void criterion3() {
    ExperimentConfig cfg = example1(SmootherKind::LUSGS);
    cfg.tau = {TauRule::Constant, 1.0};
    cfg.orders = {1};
    cfg.modes = {SolveMode::MG};
    Grid g = to_grid(run_experiment(cfg));
    bool ok = true;
    std::ostringstream d;
    d << "lusgs p1 MG";
    for (std::size_t j = 0; j < cfg.levels.size(); ++j) {
        const ResultRow& r = g.at({1, cfg.levels[j], SolveMode::MG});
        const bool cell_ok = r.status == SolveStatus::Converged &&
                             std::abs(r.iterations - kTau1LusgsP1[j]) <= 0.25 * kTau1LusgsP1[j];
        ok = ok && cell_ok;
        d << ' ' << cell(r) << (cell_ok ? "" : "!") << "/" << kTau1LusgsP1[j];
    }

    cfg = example1(SmootherKind::BlockJacobi);
    cfg.tau = {TauRule::Constant, 1.0};
    cfg.orders = {4, 5};
    g = to_grid(run_experiment(cfg));
    std::ostringstream bad;
    int worst = 0;
    const bool a = within(g, cfg, SolveMode::MG, kTau1BlockJacobiMG, 2, bad, worst);
    const bool b = within(g, cfg, SolveMode::GmresMG, kTau1BlockJacobiGmres, 2, bad, worst);
    d << "; block-Jacobi p4-5 max deviation " << worst << bad.str();
    for (int p : cfg.orders)
        for (SolveMode m : cfg.modes) {
            int lo = 1 << 20, hi = 0;
            for (int L : cfg.levels) {
                const ResultRow& r = g.at({p, L, m});
                const int it = r.status == SolveStatus::Converged ? r.iterations : 1 << 20;
                lo = std::min(lo, it);
                hi = std::max(hi, it);
            }
            if (hi - lo > 2) {
                ok = false;
                d << " p" << p << ' ' << mode_name(m) << " spread " << hi - lo;
            }
        }
    report(3, ok && a && b, "tau = 1: LU-SGS p1 doubles (+-25%), block-Jacobi p>=4 level-independent", d.str());
}

void criterion4() {
    ExperimentConfig cfg = example1(SmootherKind::BlockJacobi);
    cfg.orders = {1};
    cfg.mg.pre_local_correction = false;
    cfg.mg.post_local_correction = false;
    const Grid g = to_grid(run_experiment(cfg));
    bool ok = true;
    std::ostringstream d;
    d << "without local correction:";
    for (SolveMode m : cfg.modes) {
        d << ' ' << mode_name(m);
        for (int L : cfg.levels) {
            const ResultRow& r = g.at({1, L, m});
            d << ' ' << cell(r);
            const int first_fail = m == SolveMode::MG ? 4 : 5;
            if (L >= first_fail && r.status == SolveStatus::Converged) ok = false;
        }
    }
    // with the correction the criterion 1 sweep at p = 1 converges
    ExperimentConfig on = cfg;
    on.mg.pre_local_correction = true;
    for (const auto& r : run_experiment(on)) ok = ok && r.status == SolveStatus::Converged;
    d << "; with correction all converge";
    report(4, ok, "local correction is necessary at p = 1", d.str());
}

void criterion5() {
    ExperimentConfig cfg = example1(SmootherKind::BlockJacobi);
    cfg.scheme = Scheme::NIPG;
    cfg.tau = {TauRule::Ipdg, 1.0};
    cfg.orders = {1};
    cfg.levels = {5};
    const Grid g = to_grid(run_experiment(cfg));
    const ResultRow& mg = g.at({1, 5, SolveMode::MG});
    const ResultRow& gm = g.at({1, 5, SolveMode::GmresMG});
    const bool ok = mg.status == SolveStatus::Converged && gm.status == SolveStatus::Converged &&
                    std::abs(mg.iterations - 8) <= 2 && std::abs(gm.iterations - 6) <= 2;
    report(5, ok, "NIPG-H p1/L5 within +-2 of MG 8, GMRES 6", "MG " + cell(mg) + ", GMRES " + cell(gm));
}

void criterion6() {
    ExperimentConfig cfg;
    cfg.example = Example::Example4;
    cfg.scheme = Scheme::HDG;
    cfg.tau = {TauRule::KappaInvHmin, 1.0};
    cfg.orders = {1, 2};
    cfg.levels = {2, 3, 4, 5};
    cfg.modes = {SolveMode::GmresMG};
    const auto rows = run_experiment(cfg);
    const Grid g = to_grid(rows);
    std::ostringstream bad;
    int worst = 0;
    const bool ok = within(g, cfg, SolveMode::GmresMG, kCheckerboardGmres, 2, bad, worst);
    std::ostringstream d;
    d << "GMRES";
    for (int p : cfg.orders) {
        d << " p" << p << ':';
        for (int L : cfg.levels) d << ' ' << cell(g.at({p, L, SolveMode::GmresMG}));
    }
    d << "; max deviation " << worst << bad.str();
    report(6, ok, "example4 GMRES counts within +-2 of (2,5,5,5) and (3,4,5,5)", d.str());
}

// ---------------------------------------------------------------------------
// Operator identities

ProblemSpec identity_problem() {
    return scalar_problem([](const Eigen::Vector2d& x) { return 1.0 + 0.5 * std::sin(3 * x.x()) * x.y(); },
                          [](const Eigen::Vector2d& x) { return 1.0 + x.x() * x.y(); },
                          [](const Eigen::Vector2d& x) { return x.x() - x.y() * x.y(); });
}

struct Identities {
    double energy = 0.0, schur = 0.0, transpose = 0.0, conservation = 0.0;
};

Eigen::MatrixXd prolongation(const MGHierarchy& mg, int i) {
    const int nc = mg.level(i - 1).size();
    Eigen::MatrixXd P(mg.level(i).size(), nc);
    for (int j = 0; j < nc; ++j) P.col(j) = mg.prolongate(i, Eigen::VectorXd::Unit(nc, j));
    return P;
}

void check_identities(Scheme s, int order, int levels, Identities& out, std::mt19937& rng) {
    const int n = 1 << levels;
    const Mesh mesh = s == Scheme::RT ? build_structured_tri_mesh(n) : build_structured_quad_mesh(n);
    MethodConfig m;
    m.scheme = s;
    m.order = order;
    m.tau = s == Scheme::HDG ? Stabilization{TauRule::InvHmin, 1.0} : Stabilization{TauRule::Ipdg, 1.0};
    const TraceSystem sys = assemble_trace(mesh, identity_problem(), m);
    const MGHierarchy mg(sys, build_structured_hierarchy(mesh, levels));
    std::normal_distribution<double> gauss;
    const bool symmetric = s == Scheme::HDG || s == Scheme::SIPG || s == Scheme::RT;

    for (int i = 1; i <= mg.finest(); ++i) {
        const LevelOperator& lv = mg.level(i);
        const Eigen::MatrixXd A = lv.A.densify();
        const Eigen::MatrixXd Ac = mg.level(i - 1).A.densify();
        const Eigen::MatrixXd P = prolongation(mg, i);
        for (int k = 0; k < 50; ++k) {
            Eigen::VectorXd v(Ac.rows());
            for (int j = 0; j < v.size(); ++j) v[j] = gauss(rng);
            const Eigen::VectorXd pv = P * v;
            const double fine = pv.dot(A * pv), coarse = v.dot(Ac * v);
            out.energy = std::max(out.energy, std::abs(fine - coarse) / std::max(std::abs(fine), 1e-300));
        }
        if (lv.transfer == TransferKind::HCoarsening) {
            const Eigen::MatrixXd J(lv.J);
            const auto& I = lv.interior_dofs;
            const auto& B = lv.boundary_dofs;
            Eigen::MatrixXd AII(I.size(), I.size()), AIB(I.size(), B.size()), ABI(B.size(), I.size()),
                ABB(B.size(), B.size()), JB(B.size(), J.cols());
            for (std::size_t a = 0; a < I.size(); ++a) {
                for (std::size_t b = 0; b < I.size(); ++b) AII(a, b) = A(I[a], I[b]);
                for (std::size_t b = 0; b < B.size(); ++b) AIB(a, b) = A(I[a], B[b]);
            }
            for (std::size_t a = 0; a < B.size(); ++a) {
                for (std::size_t b = 0; b < I.size(); ++b) ABI(a, b) = A(B[a], I[b]);
                for (std::size_t b = 0; b < B.size(); ++b) ABB(a, b) = A(B[a], B[b]);
                JB.row(a) = J.row(B[a]);
            }
            const Eigen::MatrixXd oracle = JB.transpose() * (ABB - ABI * AII.fullPivLu().solve(AIB)) * JB;
            out.schur = std::max(out.schur, (Ac - oracle).norm() / oracle.norm());
        }
        if (symmetric) {
            Eigen::MatrixXd R(Ac.rows(), A.rows());
            for (int j = 0; j < A.rows(); ++j) R.col(j) = mg.restrict_residual(i, Eigen::VectorXd::Unit(A.rows(), j));
            out.transpose = std::max(out.transpose, (R - P.transpose()).cwiseAbs().maxCoeff());
        }
    }
    const Eigen::VectorXd lambda = solve_direct(sys);
    for (int e = 0; e < mesh.num_elements(); ++e)
        out.conservation = std::max(out.conservation, std::abs(conservation_defect(sys, e, lambda)));
}

void criterion7() {
    std::mt19937 rng(42);
    Identities worst;
    for (Scheme s : {Scheme::HDG, Scheme::NIPG, Scheme::IIPG, Scheme::SIPG, Scheme::RT})
        for (int p : {1, 2})
            for (int L : {2, 3}) {
                if (s == Scheme::RT && p > 1) continue;
                check_identities(s, p, L, worst, rng);
            }
    char buf[256];
    std::snprintf(buf, sizeof buf, "energy %.1e (<1e-11), Schur %.1e (<1e-10), R-P^T %.1e (<1e-12), conservation %.1e (<1e-10)",
                  worst.energy, worst.schur, worst.transpose, worst.conservation);
    const bool ok = worst.energy < 1e-11 && worst.schur < 1e-10 && worst.transpose < 1e-12 && worst.conservation < 1e-10;
    report(7, ok, "exact operator identities, all schemes, meshes up to 8 x 8", buf);
}

void criterion8() {
    ExperimentConfig cfg;
    cfg.example = Example::Example1;
    cfg.scheme = Scheme::HDG;
    cfg.tau = {TauRule::InvHmin, 1.0};
    cfg.orders = {1, 2, 3};
    cfg.levels = {2, 3, 4, 5, 6};
    bool ok = true;
    std::ostringstream d;
    d << "rates";
    int last = -1;
    for (const auto& r : run_convergence(cfg)) {
        if (r.order != last) {
            d << (last < 0 ? " p" : "; p") << r.order << ':';
            last = r.order;
        }
        if (std::isnan(r.rate)) continue;
        const bool cell_ok = std::abs(r.rate - (r.order + 1)) <= 0.2;
        ok = ok && cell_ok;
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.2f%s", r.rate, cell_ok ? "" : "!");
        d << buf;
    }
    report(8, ok, "HDG L2 order of q is p+1 +- 0.2 over 4 refinements", d.str());
}

void criterion9() {
    ExperimentConfig cfg;
    cfg.example = Example::Example6;
    cfg.scheme = Scheme::NIPG;
    cfg.tau = {TauRule::Ipdg, 1.0};
    cfg.orders = {1};
    cfg.levels = {3, 4, 5, 6};
    cfg.modes = {SolveMode::MG};
    int lo = 1 << 20, hi = 0;
    bool ok = true;
    std::ostringstream d;
    d << "MG";
    for (const auto& r : run_experiment(cfg)) {
        d << ' ' << cell(r);
        if (r.status != SolveStatus::Converged) {
            ok = false;
            continue;
        }
        lo = std::min(lo, r.iterations);
        hi = std::max(hi, r.iterations);
        ok = ok && std::abs(r.iterations - 9) <= 3;
    }
    ok = ok && hi - lo <= 2;
    d << " (levels 3-6)";
    report(9, ok, "RT1 + NIPG-H multinumerics level-independent, within 9 +- 3", d.str());
}

} // namespace

int main() {
    try {
        criterion1();
        criterion2();
        criterion3();
        criterion4();
        criterion5();
        criterion6();
        criterion7();
        criterion8();
        criterion9();
        std::printf("SKIP  criterion 10 excluded: needs external SPE10 data and the original example2 meshes\n");
    } catch (const std::exception& e) {
        std::printf("FAIL  acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
