#include "hybridmg/krylov.hpp"

#include "hybridmg/error.hpp"

#include <cmath>

namespace hybridmg {

std::string status_name(SolveStatus s) {
    switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "maxiter";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::Breakdown: return "breakdown";
    }
    return "?";
}

SolveResult gmres(const LinearOperator& A, const Eigen::VectorXd& g, const KrylovConfig& config) {
    if (!(config.tol > 0.0) || config.maxit < 1) throw ConfigError("gmres: need tol > 0 and maxit >= 1");
    const int n = static_cast<int>(g.size());
    auto M = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return config.preconditioner ? config.preconditioner(v) : v;
    };

    SolveResult out;
    out.x = Eigen::VectorXd::Zero(n);
    const double gnorm = g.norm();
    if (gnorm == 0.0) {
        out.status = SolveStatus::Converged;
        return out;
    }

    const Eigen::VectorXd r0 = M(g);
    const double beta = r0.norm();
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        out.status = SolveStatus::Breakdown;
        out.residual = 1.0;
        return out;
    }
    const int m = config.maxit;
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), s = Eigen::VectorXd::Zero(m + 1);
    V.col(0) = r0 / beta;
    s[0] = beta;

    auto true_residual = [&](int k) {
        const Eigen::VectorXd y =
            H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(s.head(k));
        out.x = V.leftCols(k) * y;
        return (g - A(out.x)).norm() / gnorm;
    };

    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd w = M(A(V.col(j)));
        for (int i = 0; i <= j; ++i) {
            H(i, j) = w.dot(V.col(i));
            w -= H(i, j) * V.col(i);
        }
        const double hnext = w.norm();
        H(j + 1, j) = hnext;
        for (int i = 0; i < j; ++i) {
            const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
            H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
            H(i, j) = t;
        }
        const double denom = std::hypot(H(j, j), H(j + 1, j));
        if (denom == 0.0 || !std::isfinite(denom)) {
            out.iterations = j;
            out.status = SolveStatus::Breakdown;
            out.residual = j > 0 ? true_residual(j) : 1.0;
            return out;
        }
        cs[j] = H(j, j) / denom;
        sn[j] = H(j + 1, j) / denom;
        H(j, j) = denom;
        H(j + 1, j) = 0.0;
        s[j + 1] = -sn[j] * s[j];
        s[j] = cs[j] * s[j];
        out.history.push_back(std::abs(s[j + 1]) / beta);

        out.iterations = j + 1;
        out.residual = true_residual(j + 1);
        if (out.residual <= config.tol) {
            out.status = SolveStatus::Converged;
            return out;
        }
        if (hnext <= 1e-14 * beta) {
            // invariant Krylov space
            out.status = SolveStatus::Breakdown;
            return out;
        }
        V.col(j + 1) = w / hnext;
    }
    out.status = SolveStatus::MaxIter;
    return out;
}

} // namespace hybridmg
