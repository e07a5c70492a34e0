#pragma once

#include "hybridmg/agglomeration.hpp"
#include "hybridmg/hybridized.hpp"
#include "hybridmg/krylov.hpp"
#include "hybridmg/smoothers.hpp"

#include <vector>

namespace hybridmg {

enum class Schedule { Doubling, Constant2 };

struct MGOptions {
    SmootherConfig smoother;
    int base_steps = 3;                // smoothing steps on the finest level
    Schedule schedule = Schedule::Doubling;
    bool pre_local_correction = true;  // after pre-smoothing
    bool post_local_correction = false; // after the coarse-grid correction
};

enum class TransferKind { None, PCoarsening, HCoarsening };

/// One level of the hierarchy. Index 0 is the coarsest level.
struct LevelOperator {
    int mesh_level = 0;            // agglomeration level whose skeleton carries the DOFs
    int order = 1;                 // polynomial order of the level space
    BlockSparseMatrix A;
    SparseMatrix A_sparse;
    Smoother smoother;
    int steps = 1;

    // Transfer to the next coarser level (absent on the coarsest level).
    TransferKind transfer = TransferKind::None;
    SparseMatrix J; // rows: DOFs of this level (zero on interior DOFs); cols: coarse DOFs
    std::vector<int> interior_dofs;
    std::vector<int> boundary_dofs;
    std::vector<std::vector<int>> macro_interior_dofs; // grouped by coarse macro
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> macro_lu;

    int size() const { return A.rows(); }
};

class MGHierarchy {
public:
    MGHierarchy(const TraceSystem& sys, const AgglomerationHierarchy& agg, const MGOptions& options = {});

    int num_levels() const { return static_cast<int>(levels_.size()); }
    const LevelOperator& level(int i) const { return levels_[i]; }
    const MGOptions& options() const { return options_; }
    int finest() const { return num_levels() - 1; }

    /// Coarse vector of level i-1 to level i.
    Eigen::VectorXd prolongate(int i, const Eigen::VectorXd& coarse) const;
    /// Residual of level i to level i-1.
    Eigen::VectorXd restrict_residual(int i, const Eigen::VectorXd& fine) const;
    /// Exact solve on the interior DOFs of level i, zero on its boundary DOFs.
    Eigen::VectorXd local_correct(int i, const Eigen::VectorXd& residual) const;
    /// Error estimate B_i(r) from one V-cycle starting at level i.
    Eigen::VectorXd vcycle(int i, const Eigen::VectorXd& residual) const;
    /// One V-cycle on the finest level.
    Eigen::VectorXd apply_preconditioner(const Eigen::VectorXd& r) const { return vcycle(finest(), r); }

private:
    MGOptions options_;
    std::vector<LevelOperator> levels_; // built finest first, reversed at the end
    Eigen::PartialPivLU<Eigen::MatrixXd> coarse_lu_;
    int coarse_size_ = 0;
};

/// Fixed-point iteration x += B(g - A x) until ||g - A x|| / ||g|| <= tol.
/// Flags divergence when the residual exceeds 1e6 times the initial one.
SolveResult mg_solve(const TraceSystem& sys, const MGHierarchy& mg, double tol = 1e-9, int maxit = 200);

/// GMRES on the trace system, left-preconditioned by one V-cycle when `mg` is non-null.
SolveResult gmres_solve(const TraceSystem& sys, const MGHierarchy* mg, double tol = 1e-9, int maxit = 200);

} // namespace hybridmg
