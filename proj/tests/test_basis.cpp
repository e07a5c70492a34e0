#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridmg/basis.hpp"
#include "hybridmg/error.hpp"

#include <cmath>
#include <random>

using namespace hybridmg;
using doctest::Approx;

TEST_CASE("gauss-legendre integrates monomials up to degree 2n-1") {
    for (int n = 1; n <= 8; ++n) {
        const Rule1D r = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < r.points.size(); ++i) s += r.weights[i] * std::pow(r.points[i], k);
            CHECK(s == Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("gauss-lobatto nodes include the endpoints and integrate degree 2n-3") {
    for (int n = 2; n <= 8; ++n) {
        const Rule1D r = gauss_lobatto(n);
        CHECK(r.points.front() == Approx(0.0));
        CHECK(r.points.back() == Approx(1.0));
        for (int k = 0; k <= 2 * n - 3; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < r.points.size(); ++i) s += r.weights[i] * std::pow(r.points[i], k);
            CHECK(s == Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("triangle rule is exact on the reference triangle") {
    // int_T x^a y^b = a! b! / (a + b + 2)!
    auto exact = [](int a, int b) { return std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3); };
    for (int d = 0; d <= 10; ++d) {
        const Rule2D r = triangle_rule(d);
        for (int a = 0; a <= d; ++a)
            for (int b = 0; a + b <= d; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < r.points.size(); ++i) s += r.weights[i] * std::pow(r.points[i].x(), a) * std::pow(r.points[i].y(), b);
                CHECK(s == Approx(exact(a, b)).epsilon(1e-12));
            }
    }
}

TEST_CASE("edge basis") {
    SUBCASE("p=1 at 0 is [1, 0]") {
        const Eigen::VectorXd v = EdgeBasis(1).eval(0.0);
        CHECK(v[0] == Approx(1.0));
        CHECK(v[1] == Approx(0.0));
    }
    SUBCASE("p=2 at its nodes is the identity") {
        const EdgeBasis b(2);
        const Eigen::MatrixXd V = b.eval(std::span<const double>(b.nodes()));
        CHECK((V - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-13);
    }
    SUBCASE("partition of unity") {
        for (int p = 0; p <= 6; ++p) CHECK(EdgeBasis(p).eval(0.37).sum() == Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("rule integrates degree 2p+3") {
        for (int p = 0; p <= 5; ++p) {
            const EdgeBasis basis(p);
            const Rule1D& r = basis.rule();
            for (int k = 0; k <= 2 * p + 3; ++k) {
                double s = 0.0;
                for (std::size_t i = 0; i < r.points.size(); ++i) s += r.weights[i] * std::pow(r.points[i], k);
                CHECK(s == Approx(1.0 / (k + 1)).epsilon(1e-13));
            }
        }
    }
    CHECK_THROWS_AS(EdgeBasis(-1), ConfigError);
}

TEST_CASE("edge mass matrix") {
    const Eigen::MatrixXd m0 = edge_mass_matrix(EdgeBasis(0), 2.5);
    CHECK(m0.rows() == 1);
    CHECK(m0(0, 0) == Approx(2.5));

    Eigen::Matrix2d ref;
    ref << 1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3;
    CHECK((edge_mass_matrix(EdgeBasis(1), 1.0) - ref).norm() < 1e-14);

    for (int p = 0; p <= 6; ++p) {
        const Eigen::MatrixXd m = edge_mass_matrix(EdgeBasis(p), 0.3);
        CHECK((m - m.transpose()).norm() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("scalar bases are nodal, sum to one and have consistent gradients") {
    for (Shape shape : {Shape::Triangle, Shape::Quad})
        for (int p = 0; p <= 5; ++p) {
            CAPTURE(p);
            const ScalarBasis b(shape, p);
            const int n = b.size();
            CHECK(n == (shape == Shape::Quad ? (p + 1) * (p + 1) : (p + 1) * (p + 2) / 2));
            for (int i = 0; i < n; ++i) {
                const Eigen::VectorXd v = b.values(b.nodes()[i]);
                for (int j = 0; j < n; ++j) CHECK(v[j] == Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
            }
            const Eigen::Vector2d x(0.21, 0.33);
            Eigen::VectorXd val;
            Eigen::MatrixX2d grad;
            b.eval(x, val, grad);
            CHECK(val.sum() == Approx(1.0).epsilon(1e-12));
            const double h = 1e-6;
            const Eigen::VectorXd fdx = (b.values(x + Eigen::Vector2d(h, 0)) - b.values(x - Eigen::Vector2d(h, 0))) / (2 * h);
            const Eigen::VectorXd fdy = (b.values(x + Eigen::Vector2d(0, h)) - b.values(x - Eigen::Vector2d(0, h))) / (2 * h);
            CHECK((fdx - grad.col(0)).norm() < 1e-7 * (1.0 + grad.norm()));
            CHECK((fdy - grad.col(1)).norm() < 1e-7 * (1.0 + grad.norm()));
        }
}

namespace {

Eigen::Matrix2d identity_field(const Eigen::Vector2d&) { return Eigen::Matrix2d::Identity(); }

ElementOperators operators(Shape shape, const std::vector<Eigen::Vector2d>& v, int p,
                           const TensorField& K = identity_field) {
    const ElementGeometry geom(shape, v);
    const ScalarBasis basis(shape, p);
    const EdgeBasis trace(p);
    const std::array<bool, 4> flipped{};
    return element_operators(element_quadrature(basis, trace, geom, std::span<const bool>(flipped.data(), geom.num_edges())), K);
}

} // namespace

TEST_CASE("element operators") {
    SUBCASE("unit square quad stiffness annihilates constants") {
        const ElementOperators ops = operators(Shape::Quad, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, 1);
        CHECK(ops.stiffness.rowwise().sum().norm() < 1e-13);
    }
    SUBCASE("reference triangle P1 stiffness") {
        const ElementOperators ops = operators(Shape::Triangle, {{0, 0}, {1, 0}, {0, 1}}, 1);
        // nodes of the triangle basis are its vertices in order
        Eigen::Matrix3d ref;
        ref << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
        CHECK((ops.stiffness - ref).norm() < 1e-13);
    }
    SUBCASE("stiffness is linear in K") {
        const std::vector<Eigen::Vector2d> v{{0.1, 0}, {1.2, 0.2}, {0.9, 1.1}, {-0.1, 0.8}};
        const ElementOperators a = operators(Shape::Quad, v, 2);
        const ElementOperators b = operators(Shape::Quad, v, 2, [](const Eigen::Vector2d&) {
            return Eigen::Matrix2d(2.0 * Eigen::Matrix2d::Identity());
        });
        CHECK((b.stiffness - 2.0 * a.stiffness).norm() < 1e-12 * a.stiffness.norm());
    }
    SUBCASE("divergence theorem for every vector basis function") {
        for (Shape shape : {Shape::Triangle, Shape::Quad}) {
            const std::vector<Eigen::Vector2d> v = shape == Shape::Quad
                                                       ? std::vector<Eigen::Vector2d>{{0, 0}, {1.3, 0.1}, {1.1, 0.9}, {0.2, 1.0}}
                                                       : std::vector<Eigen::Vector2d>{{0.2, 0.1}, {1.0, 0.3}, {0.4, 1.2}};
            for (int p = 1; p <= 3; ++p) {
                const ElementOperators ops = operators(shape, v, p);
                Eigen::VectorXd bx = Eigen::VectorXd::Zero(ops.mass.rows()), by = bx;
                for (const auto& e : ops.edges) {
                    bx += e.vv_nx.rowwise().sum();
                    by += e.vv_ny.rowwise().sum();
                }
                const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ops.mass.rows());
                CHECK((ops.div_x.transpose() * ones).norm() < 1e-11);
                const Eigen::VectorXd ix = ops.div_x.rowwise().sum();
                const Eigen::VectorXd iy = ops.div_y.rowwise().sum();
                CHECK((ix - bx).norm() < 1e-11 * (1.0 + bx.norm()));
                CHECK((iy - by).norm() < 1e-11 * (1.0 + by.norm()));
            }
        }
    }
}

TEST_CASE("Raviart-Thomas interpolation reproduces its own polynomial space") {
    const std::vector<Eigen::Vector2d> v{{0.2, 0.1}, {1.0, 0.3}, {0.4, 1.2}};
    const ElementGeometry geom(Shape::Triangle, v);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k <= 1; ++k) {
        const RTBasis rt(k, geom);
        CHECK(rt.size() == (k == 0 ? 3 : 8));
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng), e = u(rng), f = u(rng), g = u(rng);
        std::function<Eigen::Vector2d(const Eigen::Vector2d&)> field;
        if (k == 0) {
            field = [=](const Eigen::Vector2d& x) { return Eigen::Vector2d(a + c * x.x(), b + c * x.y()); };
        } else {
            field = [=](const Eigen::Vector2d& x) {
                return Eigen::Vector2d(a + c * x.x() + d * x.y() + g * x.x() * (e * x.x() + f * x.y()),
                                       b + e * x.x() - c * x.y() + g * x.y() * (e * x.x() + f * x.y()));
            };
        }
        for (const Eigen::Vector2d& x : {Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.3, 0.3), Eigen::Vector2d(0.6, 0.4)})
            CHECK((rt.interpolate(field, x) - field(x)).norm() < 1e-11);

        // basis functions are dual to the degrees of freedom
        for (int i = 0; i < rt.size(); ++i) {
            auto basis_i = [&](const Eigen::Vector2d& x) {
                Eigen::MatrixX2d val;
                Eigen::VectorXd div;
                rt.eval(x, val, div);
                return Eigen::Vector2d(val.row(i).transpose());
            };
            const Eigen::VectorXd dof = rt.dofs(basis_i);
            for (int j = 0; j < rt.size(); ++j) CHECK(dof[j] == Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
        }
    }
    CHECK_THROWS(RTBasis(2, geom));
}
