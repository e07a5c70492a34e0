#include "hybridmg/quadrature.hpp"

#include "hybridmg/error.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace hybridmg {

namespace {

// Returns (P_n(x), P_{n-1}(x)).
std::pair<double, double> legendre_pair(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, p0};
}

} // namespace

Rule1D gauss_legendre(int n) {
    if (n < 1) throw ConfigError("gauss_legendre: need at least one point");
    Rule1D rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [pn, pm] = legendre_pair(n, x);
            const double dp = n * (x * pn - pm) / (x * x - 1.0);
            const double dx = pn / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const auto [pn, pm] = legendre_pair(n, x);
        const double dp = n * (x * pn - pm) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // roots come out in descending order
        rule.points[n - 1 - i] = 0.5 * (x + 1.0);
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

Rule1D gauss_lobatto(int n) {
    if (n < 2) throw ConfigError("gauss_lobatto: need at least two points");
    const int N = n - 1;
    Eigen::VectorXd x(n), xold(n);
    for (int i = 0; i <= N; ++i) x[i] = -std::cos(std::numbers::pi * i / N);
    Eigen::MatrixXd P(n, n);
    for (int it = 0; it < 200; ++it) {
        xold = x;
        P.col(0).setOnes();
        P.col(1) = x;
        for (int k = 2; k <= N; ++k)
            P.col(k) = ((2.0 * k - 1.0) * x.cwiseProduct(P.col(k - 1)) - (k - 1.0) * P.col(k - 2)) / k;
        x = xold - (x.cwiseProduct(P.col(N)) - P.col(N - 1)).cwiseQuotient((N + 1.0) * P.col(N));
        if ((x - xold).cwiseAbs().maxCoeff() < 1e-16) break;
    }
    P.col(0).setOnes();
    P.col(1) = x;
    for (int k = 2; k <= N; ++k)
        P.col(k) = ((2.0 * k - 1.0) * x.cwiseProduct(P.col(k - 1)) - (k - 1.0) * P.col(k - 2)) / k;
    Rule1D rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.points[i] = 0.5 * (x[i] + 1.0);
        rule.weights[i] = 1.0 / (N * (N + 1.0) * P(i, N) * P(i, N));
    }
    rule.points.front() = 0.0;
    rule.points.back() = 1.0;
    return rule;
}

Rule1D gauss_legendre_for_degree(int degree) {
    return gauss_legendre(std::max(degree, 0) / 2 + 1);
}

Rule2D quad_rule(int degree) {
    const Rule1D g = gauss_legendre_for_degree(degree);
    Rule2D rule;
    for (int j = 0; j < g.size(); ++j)
        for (int i = 0; i < g.size(); ++i) {
            rule.points.emplace_back(g.points[i], g.points[j]);
            rule.weights.push_back(g.weights[i] * g.weights[j]);
        }
    return rule;
}

Rule2D triangle_rule(int degree) {
    // x = xi (1 - eta), y = eta; the Jacobian (1 - eta) raises the eta degree by one.
    const Rule1D gx = gauss_legendre_for_degree(degree);
    const Rule1D gy = gauss_legendre_for_degree(degree + 1);
    Rule2D rule;
    for (int j = 0; j < gy.size(); ++j)
        for (int i = 0; i < gx.size(); ++i) {
            const double eta = gy.points[j];
            rule.points.emplace_back(gx.points[i] * (1.0 - eta), eta);
            rule.weights.push_back(gx.weights[i] * gy.weights[j] * (1.0 - eta));
        }
    return rule;
}

} // namespace hybridmg
