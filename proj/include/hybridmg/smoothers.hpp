#pragma once

#include "hybridmg/block_sparse.hpp"

#include <string>
#include <vector>

namespace hybridmg {

enum class SmootherKind { DampedJacobi, ChebyshevJacobi, LUSGS, BlockJacobi };

std::string smoother_name(SmootherKind k);
SmootherKind parse_smoother(const std::string& name);

struct SmootherConfig {
    SmootherKind kind = SmootherKind::BlockJacobi;
    double omega = 2.0 / 3.0;
    double eig_ratio = 30.0; // Chebyshev lower bound = lambda_max / eig_ratio
};

/// Largest eigenvalue of D^{-1} A: Arnoldi on D^{-1/2} A D^{-1/2} from a seeded random
/// start, stopping once the Ritz residual is below rel_tol times the Ritz value.
double estimate_lambda_max(const BlockSparseMatrix& A, double rel_tol = 1e-2, int max_iter = 200);

/// Fixed linear smoother for one level operator.
class Smoother {
public:
    Smoother() = default;
    Smoother(const BlockSparseMatrix& A, SmootherConfig config);

    const SmootherConfig& config() const { return config_; }
    double lambda_max() const { return lambda_max_; }

    /// Applies `steps` smoothing steps to A x = r, updating x in place.
    /// For Chebyshev, `steps` is the polynomial degree.
    void smooth(Eigen::VectorXd& x, const Eigen::VectorXd& r, int steps) const;

private:
    void jacobi_step(Eigen::VectorXd& x, const Eigen::VectorXd& r) const;
    void block_jacobi_step(Eigen::VectorXd& x, const Eigen::VectorXd& r) const;
    void sgs_step(Eigen::VectorXd& x, const Eigen::VectorXd& r) const;
    void chebyshev(Eigen::VectorXd& x, const Eigen::VectorXd& r, int degree) const;

    SmootherConfig config_;
    SparseMatrix A_;
    Eigen::VectorXd inv_diag_;
    std::vector<int> block_offsets_;
    std::vector<Eigen::MatrixXd> block_inverse_;
    double lambda_max_ = 0.0;
};

} // namespace hybridmg
