#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace hybridmg {

enum class SolveStatus { Converged, MaxIter, Diverged, Breakdown };

std::string status_name(SolveStatus s);

struct SolveResult {
    Eigen::VectorXd x;
    int iterations = 0;
    SolveStatus status = SolveStatus::MaxIter;
    double residual = 0.0;        // final ||g - A x|| / ||g||
    std::vector<double> history;  // per iteration; GMRES records the preconditioned residual
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovConfig {
    double tol = 1e-9;
    int maxit = 200;
    LinearOperator preconditioner; // left preconditioner, identity when empty
};

/// Full GMRES with modified Gram-Schmidt and Givens rotations. Convergence is
/// tested on the true residual ||g - A x|| / ||g|| after every iteration.
SolveResult gmres(const LinearOperator& A, const Eigen::VectorXd& g, const KrylovConfig& config = {});

} // namespace hybridmg
