#include "hybridmg/smoothers.hpp"

#include "hybridmg/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

namespace hybridmg {

std::string smoother_name(SmootherKind k) {
    switch (k) {
    case SmootherKind::DampedJacobi: return "jacobi";
    case SmootherKind::ChebyshevJacobi: return "chebyshev";
    case SmootherKind::LUSGS: return "lusgs";
    case SmootherKind::BlockJacobi: return "block_jacobi";
    }
    return "?";
}

SmootherKind parse_smoother(const std::string& name) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
    std::replace(n.begin(), n.end(), '-', '_');
    if (n == "jacobi" || n == "damped_jacobi") return SmootherKind::DampedJacobi;
    if (n == "chebyshev" || n == "chebyshev_jacobi") return SmootherKind::ChebyshevJacobi;
    if (n == "lusgs" || n == "lu_sgs" || n == "sgs") return SmootherKind::LUSGS;
    if (n == "block_jacobi" || n == "blockjacobi") return SmootherKind::BlockJacobi;
    throw ConfigError("unknown smoother '" + name + "'");
}

namespace {

Eigen::VectorXd inverse_diagonal(const BlockSparseMatrix& A) {
    const Eigen::VectorXd d = A.diagonal();
    for (int i = 0; i < d.size(); ++i)
        if (d[i] == 0.0) throw NumericalError("zero diagonal entry at DOF " + std::to_string(i));
    return d.cwiseInverse();
}

} // namespace

double estimate_lambda_max(const BlockSparseMatrix& A, double rel_tol, int max_iter) {
    const int n = A.rows();
    if (n == 0) throw NumericalError("estimate_lambda_max: empty matrix");
    const Eigen::VectorXd d = A.diagonal();
    for (int i = 0; i < n; ++i)
        if (!(d[i] > 0.0)) throw NumericalError("estimate_lambda_max: non-positive diagonal at DOF " + std::to_string(i));
    const Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();

    // Arnoldi on D^-1/2 A D^-1/2, which is similar to D^-1 A.
    const int m = std::min(max_iter, n);
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    for (int i = 0; i < n; ++i) V(i, 0) = unif(rng);
    V.col(0).normalize();
    double lambda = 0.0;
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd w = s.cwiseProduct(A.matvec(s.cwiseProduct(V.col(j))));
        for (int i = 0; i <= j; ++i) {
            H(i, j) = w.dot(V.col(i));
            w -= H(i, j) * V.col(i);
        }
        H(j + 1, j) = w.norm();
        Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(j + 1, j + 1));
        int k = 0;
        es.eigenvalues().real().maxCoeff(&k);
        const double next = es.eigenvalues()[k].real();
        if (!std::isfinite(next)) throw NumericalError("estimate_lambda_max: non-finite estimate");
        // Ritz residual norm of the extreme pair.
        const Eigen::VectorXcd y = es.eigenvectors().col(k);
        const double resid = H(j + 1, j) * std::abs(y[j]) / y.norm();
        if (resid <= rel_tol * std::abs(next)) return next;
        lambda = next;
        V.col(j + 1) = w / H(j + 1, j);
    }
    return lambda;
}

Smoother::Smoother(const BlockSparseMatrix& A, SmootherConfig config) : config_(config) {
    A_ = A.to_sparse();
    A_.makeCompressed();
    switch (config.kind) {
    case SmootherKind::DampedJacobi:
        if (!(config.omega > 0.0 && config.omega <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
        inv_diag_ = inverse_diagonal(A);
        break;
    case SmootherKind::LUSGS: inv_diag_ = inverse_diagonal(A); break;
    case SmootherKind::ChebyshevJacobi:
        inv_diag_ = inverse_diagonal(A);
        lambda_max_ = estimate_lambda_max(A);
        if (!(lambda_max_ > 0.0)) throw NumericalError("Chebyshev smoother needs a positive eigenvalue estimate");
        break;
    case SmootherKind::BlockJacobi:
        block_offsets_ = A.block_offsets();
        for (int b = 0; b < A.num_blocks(); ++b) {
            const Eigen::MatrixXd blk = A.diagonal_block(b);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(blk);
            if (!lu.isInvertible()) throw NumericalError("singular diagonal block " + std::to_string(b));
            block_inverse_.push_back(lu.inverse());
        }
        break;
    }
}

void Smoother::jacobi_step(Eigen::VectorXd& x, const Eigen::VectorXd& r) const {
    const Eigen::VectorXd res = r - A_ * x;
    x += config_.omega * inv_diag_.cwiseProduct(res);
}

void Smoother::block_jacobi_step(Eigen::VectorXd& x, const Eigen::VectorXd& r) const {
    const Eigen::VectorXd res = r - A_ * x;
    for (std::size_t b = 0; b < block_inverse_.size(); ++b) {
        const int o = block_offsets_[b];
        const int s = block_offsets_[b + 1] - o;
        x.segment(o, s) += block_inverse_[b] * res.segment(o, s);
    }
}

void Smoother::sgs_step(Eigen::VectorXd& x, const Eigen::VectorXd& r) const {
    const int n = static_cast<int>(A_.rows());
    auto relax = [&](int i) {
        double s = r[i];
        for (SparseMatrix::InnerIterator it(A_, i); it; ++it) s -= it.value() * x[it.col()];
        x[i] += s * inv_diag_[i];
    };
    for (int i = 0; i < n; ++i) relax(i);
    for (int i = n - 1; i >= 0; --i) relax(i);
}

void Smoother::chebyshev(Eigen::VectorXd& x, const Eigen::VectorXd& r, int degree) const {
    const double lmax = lambda_max_;
    const double lmin = lambda_max_ / config_.eig_ratio;
    const double theta = 0.5 * (lmax + lmin);
    const double delta = 0.5 * (lmax - lmin);
    const double sigma = theta / delta;
    double rho = 1.0 / sigma;
    Eigen::VectorXd res = r - A_ * x;
    Eigen::VectorXd d = inv_diag_.cwiseProduct(res) / theta;
    for (int k = 1; k <= degree; ++k) {
        x += d;
        if (k == degree) break;
        res -= A_ * d;
        const double rho_next = 1.0 / (2.0 * sigma - rho);
        d = (rho_next * rho) * d + (2.0 * rho_next / delta) * inv_diag_.cwiseProduct(res);
        rho = rho_next;
    }
}

void Smoother::smooth(Eigen::VectorXd& x, const Eigen::VectorXd& r, int steps) const {
    if (x.size() != r.size() || r.size() != A_.rows()) throw Error("smooth: dimension mismatch");
    if (steps <= 0 || r.size() == 0) return;
    switch (config_.kind) {
    case SmootherKind::DampedJacobi:
        for (int s = 0; s < steps; ++s) jacobi_step(x, r);
        break;
    case SmootherKind::BlockJacobi:
        for (int s = 0; s < steps; ++s) block_jacobi_step(x, r);
        break;
    case SmootherKind::LUSGS:
        for (int s = 0; s < steps; ++s) sgs_step(x, r);
        break;
    case SmootherKind::ChebyshevJacobi: chebyshev(x, r, steps); break;
    }
}

} // namespace hybridmg
