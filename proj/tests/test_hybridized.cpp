#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridmg/error.hpp"
#include "hybridmg/hybridized.hpp"

#include <cmath>
#include <random>

using namespace hybridmg;
using doctest::Approx;

namespace {

const std::vector<Scheme> kAll{Scheme::HDG, Scheme::NIPG, Scheme::IIPG, Scheme::SIPG, Scheme::RT};

MethodConfig method_for(Scheme s, int order = 1) {
    MethodConfig m;
    m.scheme = s;
    m.order = order;
    m.tau = s == Scheme::HDG ? Stabilization{TauRule::InvHmin, 1.0} : Stabilization{TauRule::Ipdg, 1.0};
    return m;
}

Mesh mesh_for(Scheme s, int n) { return s == Scheme::RT ? build_structured_tri_mesh(n) : build_structured_quad_mesh(n); }

double linear(const Eigen::Vector2d& x) { return 1.0 + x.x() - 2.0 * x.y(); }

ProblemSpec linear_problem() {
    return scalar_problem([](const Eigen::Vector2d&) { return 1.0; }, [](const Eigen::Vector2d&) { return 0.0; }, linear,
                          linear);
}

// Perturbed element with counter-clockwise vertices.
std::vector<Eigen::Vector2d> random_element(Shape shape, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    std::vector<Eigen::Vector2d> v = shape == Shape::Quad
                                         ? std::vector<Eigen::Vector2d>{{0, 0}, {1, 0}, {1, 1}, {0, 1}}
                                         : std::vector<Eigen::Vector2d>{{0, 0}, {1, 0}, {0, 1}};
    std::uniform_real_distribution<double> scale(0.05, 2.0);
    const double s = scale(rng);
    for (auto& x : v) x = s * (x + Eigen::Vector2d(u(rng), u(rng)));
    return v;
}

} // namespace

TEST_CASE("linear solutions are reproduced by every scheme") {
    for (Scheme s : kAll)
        for (int n : {1, 3}) {
            CAPTURE(scheme_name(s));
            CAPTURE(n);
            const Mesh mesh = mesh_for(s, n);
            const TraceSystem sys = assemble_trace(mesh, linear_problem(), method_for(s));
            const Eigen::VectorXd lambda = solve_direct(sys);
            // trace nodes coincide with the edge endpoints for p = 1
            for (int b = 0; b < static_cast<int>(sys.block_edge.size()); ++b) {
                const int e = sys.block_edge[b];
                CHECK(lambda[2 * b] == Approx(linear(mesh.edge_point(e, 0.0))).epsilon(1e-10));
                CHECK(lambda[2 * b + 1] == Approx(linear(mesh.edge_point(e, 1.0))).epsilon(1e-10));
            }
            CHECK(l2_error(sys, recover_volume(sys, lambda), linear) < 1e-10);
        }
}

TEST_CASE("constants are reproduced by lowest-order HDG and RT") {
    auto one = [](const Eigen::Vector2d&) { return 3.0; };
    const ProblemSpec pb = scalar_problem([](const Eigen::Vector2d&) { return 2.0; },
                                          [](const Eigen::Vector2d&) { return 0.0; }, one, one);
    for (Scheme s : {Scheme::HDG, Scheme::RT}) {
        const Mesh mesh = build_structured_tri_mesh(3);
        const TraceSystem sys = assemble_trace(mesh, pb, method_for(s, 0));
        const Eigen::VectorXd lambda = solve_direct(sys);
        CHECK((lambda.array() - 3.0).abs().maxCoeff() < 1e-11);
        CHECK(l2_error(sys, recover_volume(sys, lambda), one) < 1e-11);
    }
}

TEST_CASE("flux moments of a linear solution match the exact edge fluxes") {
    // u = -grad q = (-1, 2); total outward flux per edge is (u . n) |e|
    const Eigen::Vector2d u(-1.0, 2.0);
    for (Scheme s : kAll) {
        CAPTURE(scheme_name(s));
        const Mesh mesh = mesh_for(s, 2);
        const TraceSystem sys = assemble_trace(mesh, linear_problem(), method_for(s));
        const Eigen::VectorXd lambda = solve_direct(sys);
        for (int e = 0; e < mesh.num_elements(); ++e) {
            const ElementGeometry g = mesh.geometry(e);
            const Eigen::VectorXd m = element_flux_moments(sys, e, lambda);
            for (int k = 0; k < g.num_edges(); ++k) {
                const Eigen::Vector2d d = g.vertex((k + 1) % g.num_edges()) - g.vertex(k);
                const Eigen::Vector2d n(d.y(), -d.x());
                CHECK(m.segment(2 * k, 2).sum() == Approx(u.dot(n)).epsilon(1e-10).scale(1.0));
            }
        }
    }
}

TEST_CASE("local condensation on random elements") {
    std::mt19937 rng(2024);
    const ProblemSpec pb = scalar_problem([](const Eigen::Vector2d& x) { return 1.0 + 0.5 * std::sin(x.x() + 2 * x.y()); },
                                          [](const Eigen::Vector2d& x) { return std::cos(x.x()) + x.y(); },
                                          [](const Eigen::Vector2d&) { return 0.0; });
    std::uniform_int_distribution<int> pick(0, 4);
    std::uniform_int_distribution<int> order(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const Scheme s = kAll[pick(rng)];
        const Shape shape = s == Scheme::RT || trial % 2 ? Shape::Triangle : Shape::Quad;
        const auto v = random_element(shape, rng);
        ElementContext ctx{ElementGeometry(shape, v)};
        ctx.order = s == Scheme::RT ? 1 : order(rng);
        for (int k = 0; k < ctx.geom.num_edges(); ++k) {
            ctx.flipped[k] = (trial + k) % 3 == 0;
            const double h = ctx.geom.diameter();
            ctx.tau[k] = s == Scheme::HDG ? 1.0 / h : (ctx.order + 1.0) * (ctx.order + 2.0) / h;
            if (s == Scheme::SIPG) ctx.tau[k] *= 10.0; // coercive penalty
        }
        if (s == Scheme::RT) ctx.tau.fill(0.0);
        CAPTURE(trial);
        CAPTURE(scheme_name(s));

        const LocalSystem sys = s == Scheme::HDG  ? local_system_hdg(ctx, pb)
                                : s == Scheme::RT ? local_system_rth(ctx, pb)
                                                  : local_system_ipdg(ctx, pb, symmetry_flag(s));
        const LocalDtN d = condense(sys, s, trial);
        const int nl = static_cast<int>(d.S.rows());

        // the recovered state solves the uncondensed system for an arbitrary trace
        Eigen::VectorXd lambda(nl);
        for (int i = 0; i < nl; ++i) lambda[i] = std::sin(1.0 + i);
        const Eigen::VectorXd x = d.L * lambda + d.R;
        CHECK((sys.K * x + sys.C * lambda - sys.F).norm() < 1e-9 * (1.0 + sys.F.norm() + sys.C.norm()));
        // flux moments from the uncondensed rows
        const Eigen::VectorXd flux = sys.E * x + sys.G * lambda;
        CHECK((d.b - d.S * lambda - flux).norm() < 1e-9 * (1.0 + flux.norm()));

        // dense Schur complement oracle
        const Eigen::MatrixXd S = sys.E * sys.K.fullPivLu().solve(sys.C) - sys.G;
        CHECK((d.S - S).norm() < 1e-9 * S.norm());

        // constant traces produce constant states with zero flux
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(nl);
        CHECK((d.S * ones).norm() < 1e-9 * d.S.norm());

        if (s == Scheme::HDG || s == Scheme::SIPG || s == Scheme::RT) {
            CHECK((d.S - d.S.transpose()).norm() < 1e-9 * d.S.norm());
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (d.S + d.S.transpose()));
            CHECK(es.eigenvalues().minCoeff() > -1e-9 * d.S.norm());
        }
        if (s == Scheme::NIPG) CHECK((d.S - d.S.transpose()).norm() > 1e-6 * d.S.norm());
    }
}

TEST_CASE("elementwise conservation") {
    const ProblemSpec pb = scalar_problem([](const Eigen::Vector2d& x) { return 1.0 + x.x() * x.x(); },
                                          [](const Eigen::Vector2d& x) { return std::exp(x.x()) * (1 + x.y()); },
                                          [](const Eigen::Vector2d& x) { return x.x() * x.y(); });
    for (Scheme s : kAll) {
        CAPTURE(scheme_name(s));
        const Mesh mesh = mesh_for(s, 4);
        const TraceSystem sys = assemble_trace(mesh, pb, method_for(s));
        const Eigen::VectorXd lambda = solve_direct(sys);
        for (int e = 0; e < mesh.num_elements(); ++e) CHECK(std::abs(conservation_defect(sys, e, lambda)) < 1e-10);

        // fluxes through interior edges cancel between the two sides
        const Eigen::VectorXd residual = sys.g - sys.A.matvec(lambda);
        CHECK(residual.norm() < 1e-10 * (1.0 + sys.g.norm()));
    }
}

TEST_CASE("trace operator symmetry follows the scheme") {
    for (Scheme s : kAll) {
        const TraceSystem sys = assemble_trace(mesh_for(s, 3), linear_problem(), method_for(s, 1));
        const bool sym = s == Scheme::HDG || s == Scheme::SIPG || s == Scheme::RT;
        CHECK(sys.symmetric_scheme() == sym);
        CHECK(sys.A.is_symmetric() == sym);
    }
    CHECK(symmetry_flag(Scheme::NIPG) == -1);
    CHECK(symmetry_flag(Scheme::IIPG) == 0);
    CHECK(symmetry_flag(Scheme::SIPG) == 1);
}

TEST_CASE("multinumerics assembly") {
    const Mesh mesh = build_structured_tri_mesh(4);
    MethodConfig m = method_for(Scheme::NIPG);
    m.tau_by_scheme[Scheme::NIPG] = {TauRule::Ipdg, 1.0};
    m.element_schemes.resize(mesh.num_elements());
    for (int e = 0; e < mesh.num_elements(); ++e) m.element_schemes[e] = e % 2 ? Scheme::RT : Scheme::NIPG;
    const TraceSystem sys = assemble_trace(mesh, linear_problem(), m);
    CHECK_FALSE(sys.symmetric_scheme());
    CHECK_FALSE(sys.A.is_symmetric());
    const Eigen::VectorXd lambda = solve_direct(sys);
    CHECK(l2_error(sys, recover_volume(sys, lambda), linear) < 1e-10);

    m.element_schemes.pop_back();
    CHECK_THROWS_AS(assemble_trace(mesh, linear_problem(), m), ConfigError);
}

TEST_CASE("element tags select schemes") {
    const Mesh mesh = import_tri_mesh(std::string(HYBRIDMG_TEST_DATA) + "/tagged_quads.msh");
    const auto schemes = resolve_schemes(mesh, method_for(Scheme::SIPG));
    CHECK(schemes[0] == Scheme::HDG);
    CHECK(schemes[1] == Scheme::NIPG);
}

TEST_CASE("system dimensions") {
    SUBCASE("2x2 quads with p = 1 have four interior edges") {
        const TraceSystem sys = assemble_trace(build_structured_quad_mesh(2), linear_problem(), method_for(Scheme::HDG));
        CHECK(sys.size() == 8);
        CHECK(sys.A.num_blocks() == 4);
    }
    SUBCASE("a single element has an empty trace system") {
        const TraceSystem sys = assemble_trace(build_structured_quad_mesh(1), linear_problem(), method_for(Scheme::HDG, 2));
        CHECK(sys.size() == 0);
        const Eigen::VectorXd lambda = solve_direct(sys);
        CHECK(lambda.size() == 0);
        CHECK(l2_error(sys, recover_volume(sys, lambda), linear) < 1e-10);
        CHECK_THROWS_AS(recover_volume(sys, Eigen::VectorXd::Zero(2)), Error);
    }
}

TEST_CASE("invalid configurations") {
    const ProblemSpec pb = linear_problem();
    CHECK_THROWS_AS(assemble_trace(build_structured_quad_mesh(2), pb, method_for(Scheme::RT)), ConfigError);
    CHECK_THROWS_AS(assemble_trace(build_structured_tri_mesh(2), pb, method_for(Scheme::RT, 2)), ConfigError);
    CHECK_THROWS_AS(assemble_trace(build_structured_quad_mesh(2), pb, method_for(Scheme::SIPG, 0)), ConfigError);

    // IIPG without penalty leaves constants in the kernel of the local block
    MethodConfig m = method_for(Scheme::IIPG);
    m.tau = {TauRule::Constant, 0.0};
    CHECK_THROWS_AS(assemble_trace(build_structured_quad_mesh(2), pb, m), NumericalError);
}
