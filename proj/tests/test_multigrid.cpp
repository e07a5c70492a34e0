#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridmg/error.hpp"
#include "hybridmg/multigrid.hpp"

#include <cmath>
#include <random>

using namespace hybridmg;
using doctest::Approx;

namespace {

struct Setup {
    Mesh mesh;
    TraceSystem sys;
    AgglomerationHierarchy agg;
};

ProblemSpec smooth_problem() {
    return scalar_problem([](const Eigen::Vector2d& x) { return 1.0 + 0.5 * std::sin(3 * x.x()) * x.y(); },
                          [](const Eigen::Vector2d& x) { return 1.0 + x.x(); },
                          [](const Eigen::Vector2d& x) { return x.x() * (1 - x.y()); });
}

Setup make_setup(Scheme s, int levels, int order, bool triangles = false) {
    const int n = 1 << levels;
    Setup out{triangles || s == Scheme::RT ? build_structured_tri_mesh(n) : build_structured_quad_mesh(n), {}, {}};
    MethodConfig m;
    m.scheme = s;
    m.order = order;
    m.tau = s == Scheme::HDG ? Stabilization{TauRule::InvHmin, 1.0} : Stabilization{TauRule::Ipdg, 1.0};
    out.sys = assemble_trace(out.mesh, smooth_problem(), m);
    out.agg = build_structured_hierarchy(out.mesh, levels);
    return out;
}

Eigen::MatrixXd dense_prolongation(const MGHierarchy& mg, int i) {
    const int nc = mg.level(i - 1).size();
    Eigen::MatrixXd P(mg.level(i).size(), nc);
    for (int j = 0; j < nc; ++j) P.col(j) = mg.prolongate(i, Eigen::VectorXd::Unit(nc, j));
    return P;
}

Eigen::MatrixXd dense_vcycle(const MGHierarchy& mg) {
    const int n = mg.level(mg.finest()).size();
    Eigen::MatrixXd B(n, n);
    for (int j = 0; j < n; ++j) B.col(j) = mg.apply_preconditioner(Eigen::VectorXd::Unit(n, j));
    return B;
}

Eigen::VectorXd random_vector(int n, std::mt19937& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

const std::vector<Scheme> kAll{Scheme::HDG, Scheme::NIPG, Scheme::IIPG, Scheme::SIPG, Scheme::RT};

} // namespace

TEST_CASE("coarse operators are Galerkin products with the harmonic extension") {
    std::mt19937 rng(17);
    for (Scheme s : kAll)
        for (int p : {1, 2}) {
            if (s == Scheme::RT && p > 1) continue;
            CAPTURE(scheme_name(s));
            CAPTURE(p);
            const Setup st = make_setup(s, 3, p);
            const MGHierarchy mg(st.sys, st.agg);
            CHECK(mg.num_levels() == (p > 1 ? 4 : 3));
            for (int i = 1; i <= mg.finest(); ++i) {
                CAPTURE(i);
                const Eigen::MatrixXd A = mg.level(i).A.densify();
                const Eigen::MatrixXd Ac = mg.level(i - 1).A.densify();
                const Eigen::MatrixXd P = dense_prolongation(mg, i);
                const double scale = A.norm();
                CHECK((Ac - P.transpose() * A * P).norm() < 1e-11 * scale);
                for (int k = 0; k < 50; ++k) {
                    const Eigen::VectorXd v = random_vector(Ac.rows(), rng);
                    const Eigen::VectorXd pv = P * v;
                    CHECK(v.dot(Ac * v) == Approx(pv.dot(A * pv)).epsilon(1e-11).scale(scale * v.squaredNorm()));
                }
            }
        }
}

TEST_CASE("h-coarse operator equals the boundary Schur complement") {
    for (Scheme s : {Scheme::HDG, Scheme::NIPG}) {
        const Setup st = make_setup(s, 3, 1);
        const MGHierarchy mg(st.sys, st.agg);
        const int i = mg.finest();
        const LevelOperator& lv = mg.level(i);
        const Eigen::MatrixXd A = lv.A.densify();
        const Eigen::MatrixXd J(lv.J);
        const int nI = static_cast<int>(lv.interior_dofs.size());
        const int nB = static_cast<int>(lv.boundary_dofs.size());
        CHECK(nI + nB == lv.size());
        Eigen::MatrixXd AII(nI, nI), AIB(nI, nB), ABI(nB, nI), ABB(nB, nB), JB(nB, J.cols());
        for (int a = 0; a < nI; ++a) {
            for (int b = 0; b < nI; ++b) AII(a, b) = A(lv.interior_dofs[a], lv.interior_dofs[b]);
            for (int b = 0; b < nB; ++b) AIB(a, b) = A(lv.interior_dofs[a], lv.boundary_dofs[b]);
        }
        for (int a = 0; a < nB; ++a) {
            for (int b = 0; b < nI; ++b) ABI(a, b) = A(lv.boundary_dofs[a], lv.interior_dofs[b]);
            for (int b = 0; b < nB; ++b) ABB(a, b) = A(lv.boundary_dofs[a], lv.boundary_dofs[b]);
            JB.row(a) = J.row(lv.boundary_dofs[a]);
        }
        for (int a : lv.interior_dofs) CHECK(J.row(a).norm() == 0.0);
        const Eigen::MatrixXd schur = ABB - ABI * AII.fullPivLu().solve(AIB);
        const Eigen::MatrixXd oracle = JB.transpose() * schur * JB;
        CHECK((mg.level(i - 1).A.densify() - oracle).norm() < 1e-10 * oracle.norm());
    }
}

TEST_CASE("restriction is the transpose of prolongation for symmetric schemes") {
    std::mt19937 rng(5);
    for (Scheme s : {Scheme::HDG, Scheme::SIPG, Scheme::RT}) {
        const Setup st = make_setup(s, 3, 1);
        const MGHierarchy mg(st.sys, st.agg);
        for (int i = 1; i <= mg.finest(); ++i) {
            const Eigen::MatrixXd P = dense_prolongation(mg, i);
            const Eigen::VectorXd r = random_vector(mg.level(i).size(), rng);
            const Eigen::VectorXd a = mg.restrict_residual(i, r);
            const Eigen::VectorXd b = P.transpose() * r;
            CHECK((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
    }
}

TEST_CASE("local correction removes the interior residual") {
    std::mt19937 rng(9);
    for (Scheme s : kAll) {
        const Setup st = make_setup(s, 3, 1);
        const MGHierarchy mg(st.sys, st.agg);
        for (int i = 1; i <= mg.finest(); ++i) {
            const LevelOperator& lv = mg.level(i);
            const Eigen::VectorXd r = random_vector(lv.size(), rng);
            const Eigen::VectorXd e = mg.local_correct(i, r);
            const Eigen::VectorXd after = r - lv.A_sparse * e;
            for (int d : lv.interior_dofs) CHECK(std::abs(after[d]) < 1e-10 * r.norm());
            for (int d : lv.boundary_dofs) CHECK(e[d] == 0.0);
        }
    }
}

TEST_CASE("the V-cycle is a linear contraction") {
    std::mt19937 rng(3);
    for (SmootherKind k : {SmootherKind::BlockJacobi, SmootherKind::LUSGS, SmootherKind::DampedJacobi,
                           SmootherKind::ChebyshevJacobi}) {
        CAPTURE(smoother_name(k));
        const Setup st = make_setup(Scheme::HDG, 3, 2);
        MGOptions opt;
        opt.smoother.kind = k;
        const MGHierarchy mg(st.sys, st.agg, opt);
        const int n = st.sys.size();
        const Eigen::VectorXd r1 = random_vector(n, rng), r2 = random_vector(n, rng);
        const Eigen::VectorXd lhs = mg.apply_preconditioner(2.0 * r1 - 0.5 * r2);
        const Eigen::VectorXd rhs = 2.0 * mg.apply_preconditioner(r1) - 0.5 * mg.apply_preconditioner(r2);
        CHECK((lhs - rhs).norm() < 1e-11 * rhs.norm());

        const Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n, n) - dense_vcycle(mg) * st.sys.A.densify();
        CHECK(E.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
        for (int j = 0; j < n; j += 7) CHECK(E.col(j).norm() < 1.0);
    }
}

TEST_CASE("smoothing schedule") {
    const Setup st = make_setup(Scheme::HDG, 4, 2);
    MGOptions opt;
    opt.base_steps = 3;
    const MGHierarchy mg(st.sys, st.agg, opt);
    REQUIRE(mg.num_levels() == 5);
    for (int i = 1; i <= mg.finest(); ++i) CHECK(mg.level(i).steps == 3 << (mg.finest() - i));
    CHECK(mg.level(mg.finest()).transfer == TransferKind::PCoarsening);
    CHECK(mg.level(1).transfer == TransferKind::HCoarsening);
    CHECK(mg.level(0).transfer == TransferKind::None);

    opt.schedule = Schedule::Constant2;
    const MGHierarchy flat(st.sys, st.agg, opt);
    for (int i = 1; i <= flat.finest(); ++i) CHECK(flat.level(i).steps == 2);
}

TEST_CASE("level dimensions") {
    SUBCASE("seven levels on a 128 x 128 grid leave eight coarse DOFs") {
        const Setup st = make_setup(Scheme::HDG, 7, 1);
        const MGHierarchy mg(st.sys, st.agg);
        CHECK(mg.num_levels() == 7);
        CHECK(mg.level(0).size() == 8);
        // level k carries two DOFs per interior macro-edge of the 2^k x 2^k macro grid
        for (int k = 1; k <= 6; ++k) {
            const int m = 1 << k;
            CHECK(mg.level(k - 1).size() == 2 * 2 * m * (m - 1));
        }
        CHECK(mg.level(6).size() == st.sys.size());
    }
    SUBCASE("the p-level keeps one P1 pair per edge") {
        const Setup st = make_setup(Scheme::HDG, 3, 3);
        const MGHierarchy mg(st.sys, st.agg);
        CHECK(mg.level(mg.finest()).size() == 4 * st.sys.A.num_blocks());
        CHECK(mg.level(mg.finest() - 1).size() == 2 * st.sys.A.num_blocks());
        CHECK(mg.level(mg.finest() - 1).mesh_level == 3);
    }
}

TEST_CASE("solvers") {
    SUBCASE("multigrid, preconditioned GMRES and a direct solve agree") {
        for (Scheme s : kAll) {
            CAPTURE(scheme_name(s));
            const Setup st = make_setup(s, 4, 1);
            const MGHierarchy mg(st.sys, st.agg);
            const Eigen::VectorXd direct = solve_direct(st.sys);
            const SolveResult g = gmres_solve(st.sys, &mg, 1e-11, 200);
            REQUIRE(g.status == SolveStatus::Converged);
            CHECK((g.x - direct).norm() < 1e-8 * direct.norm());
            const SolveResult plain = gmres_solve(st.sys, nullptr, 1e-11, 500);
            CHECK(g.iterations < plain.iterations);

            const VolumeSolution a = recover_volume(st.sys, direct), b = recover_volume(st.sys, g.x);
            double diff = 0.0, norm = 0.0;
            for (std::size_t e = 0; e < a.x.size(); ++e) {
                diff += (a.x[e] - b.x[e]).squaredNorm();
                norm += a.x[e].squaredNorm();
            }
            CHECK(std::sqrt(diff) < 1e-7 * std::sqrt(norm));

            if (s != Scheme::IIPG) {
                const SolveResult m = mg_solve(st.sys, mg, 1e-10, 200);
                CHECK(m.status == SolveStatus::Converged);
                CHECK((m.x - direct).norm() < 1e-7 * direct.norm());
                CHECK(m.residual == Approx((st.sys.g - st.sys.A.matvec(m.x)).norm() / st.sys.g.norm()));
            }
        }
    }
    SUBCASE("homogeneous data") {
        Setup st = make_setup(Scheme::HDG, 3, 1);
        st.sys.g.setZero();
        const MGHierarchy mg(st.sys, st.agg);
        const SolveResult r = mg_solve(st.sys, mg);
        CHECK(r.status == SolveStatus::Converged);
        CHECK(r.iterations == 0);
        CHECK(r.x.norm() == 0.0);
    }
}

TEST_CASE("hierarchy construction errors") {
    const Setup st = make_setup(Scheme::HDG, 3, 1);
    CHECK_THROWS_AS(MGHierarchy(st.sys, build_structured_hierarchy(build_structured_quad_mesh(4), 2)), ConfigError);
    MGOptions opt;
    opt.base_steps = 0;
    CHECK_THROWS_AS(MGHierarchy(st.sys, st.agg, opt), ConfigError);

    MethodConfig m;
    m.order = 0;
    const TraceSystem p0 = assemble_trace(st.mesh, smooth_problem(), m);
    CHECK_THROWS_AS(MGHierarchy(p0, st.agg), ConfigError);
    const MGHierarchy mg(st.sys, st.agg);
    CHECK_THROWS_AS(mg.prolongate(0, Eigen::VectorXd()), Error);
}
