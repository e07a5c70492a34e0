#include "hybridmg/multigrid.hpp"

#include "hybridmg/error.hpp"

#include <cmath>
#include <map>

namespace hybridmg {

namespace {

// A level DOF unit: a chain of fine edges carrying one P1 function (or one
// P^p function on the finest level), described by its two end edges.
struct Unit {
    int first_edge;
    bool first_reversed;
    int last_edge;
    bool last_reversed;
};

SparseMatrix triplets_to_sparse(int rows, int cols, const std::vector<Eigen::Triplet<double>>& t) {
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

LevelOperator make_level(SparseMatrix a, int mesh_level, int order, int block) {
    LevelOperator lv;
    lv.mesh_level = mesh_level;
    lv.order = order;
    lv.A = BlockSparseMatrix::from_sparse(a, std::vector<int>(a.rows() / block, block));
    lv.A_sparse = std::move(a);
    return lv;
}

LevelOperator p_coarsen(LevelOperator& fine, int order) {
    const int nb = fine.A.num_blocks();
    const EdgeBasis basis(order);
    std::vector<Eigen::Triplet<double>> t;
    for (int b = 0; b < nb; ++b)
        for (int m = 0; m <= order; ++m) {
            const double s = basis.nodes()[m];
            t.emplace_back(b * (order + 1) + m, 2 * b, 1.0 - s);
            t.emplace_back(b * (order + 1) + m, 2 * b + 1, s);
        }
    fine.transfer = TransferKind::PCoarsening;
    fine.J = triplets_to_sparse(fine.size(), 2 * nb, t);
    for (int i = 0; i < fine.size(); ++i) fine.boundary_dofs.push_back(i);
    const SparseMatrix JT = fine.J.transpose();
    SparseMatrix coarse = JT * (fine.A_sparse * fine.J);
    return make_level(std::move(coarse), fine.mesh_level, 1, 2);
}

LevelOperator h_coarsen(LevelOperator& fine, const Mesh& mesh, const AgglomerationHierarchy& agg,
                        const std::vector<Unit>& fine_units, std::vector<Unit>& coarse_units) {
    const int k = fine.mesh_level;
    const AgglomerationLevel& lvl = agg.level(k - 1);

    std::vector<int> coarse_of_macro_edge(lvl.macro_edges.size(), -1);
    coarse_units.clear();
    for (std::size_t m = 0; m < lvl.macro_edges.size(); ++m) {
        const MacroEdge& me = lvl.macro_edges[m];
        if (me.on_domain_boundary()) continue;
        coarse_of_macro_edge[m] = static_cast<int>(coarse_units.size());
        coarse_units.push_back({me.fine_edges.front(), me.reversed.front(), me.fine_edges.back(), me.reversed.back()});
    }
    const int nc = 2 * static_cast<int>(coarse_units.size());

    std::map<int, std::vector<int>> interior_by_macro;
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t u = 0; u < fine_units.size(); ++u) {
        const Unit& unit = fine_units[u];
        const int f0 = unit.first_edge;
        const int r0 = 2 * static_cast<int>(u);
        switch (lvl.edge_class[f0]) {
        case EdgeClass::Interior: {
            auto& dofs = interior_by_macro[lvl.macro_of_element[mesh.edge(f0).left]];
            dofs.push_back(r0);
            dofs.push_back(r0 + 1);
            fine.interior_dofs.push_back(r0);
            fine.interior_dofs.push_back(r0 + 1);
            break;
        }
        case EdgeClass::MacroBoundary: {
            const int m = lvl.macro_edge_of_edge[f0];
            if (lvl.macro_edge_of_edge[unit.last_edge] != m)
                throw TopologyError("level " + std::to_string(k) + " macro-edge straddles two level-" +
                                    std::to_string(k - 1) + " macro-edges");
            const MacroEdge& me = lvl.macro_edges[m];
            const int p0 = lvl.position_in_macro_edge[f0];
            const int p1 = lvl.position_in_macro_edge[unit.last_edge];
            const double s0 = unit.first_reversed ? me.param_at_edge_end(p0) : me.param_at_edge_start(p0);
            const double s1 = unit.last_reversed ? me.param_at_edge_start(p1) : me.param_at_edge_end(p1);
            const int c = 2 * coarse_of_macro_edge[m];
            t.emplace_back(r0, c, 1.0 - s0);
            t.emplace_back(r0, c + 1, s0);
            t.emplace_back(r0 + 1, c, 1.0 - s1);
            t.emplace_back(r0 + 1, c + 1, s1);
            fine.boundary_dofs.push_back(r0);
            fine.boundary_dofs.push_back(r0 + 1);
            break;
        }
        case EdgeClass::DomainBoundary: throw TopologyError("domain-boundary edge carries trace DOFs");
        }
    }
    fine.transfer = TransferKind::HCoarsening;
    fine.J = triplets_to_sparse(fine.size(), nc, t);

    // Per-macro interior factorizations.
    const SparseMatrix& A = fine.A_sparse;
    for (auto& [macro, dofs] : interior_by_macro) {
        const int n = static_cast<int>(dofs.size());
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(n, n);
        std::map<int, int> local;
        for (int i = 0; i < n; ++i) local[dofs[i]] = i;
        for (int i = 0; i < n; ++i)
            for (SparseMatrix::InnerIterator it(A, dofs[i]); it; ++it)
                if (auto f = local.find(static_cast<int>(it.col())); f != local.end()) block(i, f->second) = it.value();
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(block);
        if (!(lu.rcond() > 1e-14))
            throw NumericalError("singular interior block for level-" + std::to_string(k - 1) + " macro " +
                                 std::to_string(macro));
        fine.macro_interior_dofs.push_back(dofs);
        fine.macro_lu.push_back(std::move(lu));
    }

    // Prolongation P = [J_B; -A_II^{-1} A_IB J_B], coarse operator J^T A P.
    const SparseMatrix AJ = A * fine.J;
    std::vector<Eigen::Triplet<double>> pt = t;
    for (std::size_t mi = 0; mi < fine.macro_interior_dofs.size(); ++mi) {
        const auto& dofs = fine.macro_interior_dofs[mi];
        std::map<int, int> cols;
        for (int d : dofs)
            for (SparseMatrix::InnerIterator it(AJ, d); it; ++it) cols.emplace(static_cast<int>(it.col()), 0);
        if (cols.empty()) continue;
        int next = 0;
        for (auto& [c, idx] : cols) idx = next++;
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(dofs.size(), cols.size());
        for (std::size_t i = 0; i < dofs.size(); ++i)
            for (SparseMatrix::InnerIterator it(AJ, dofs[i]); it; ++it) rhs(i, cols[static_cast<int>(it.col())]) = it.value();
        const Eigen::MatrixXd X = -fine.macro_lu[mi].solve(rhs);
        for (std::size_t i = 0; i < dofs.size(); ++i)
            for (const auto& [c, idx] : cols) pt.emplace_back(dofs[i], c, X(i, idx));
    }
    const SparseMatrix P = triplets_to_sparse(fine.size(), nc, pt);
    const SparseMatrix JT = fine.J.transpose();
    SparseMatrix coarse = JT * (A * P);
    return make_level(std::move(coarse), k - 1, 1, 2);
}

} // namespace

MGHierarchy::MGHierarchy(const TraceSystem& sys, const AgglomerationHierarchy& agg, const MGOptions& options)
    : options_(options) {
    if (sys.order < 1) throw ConfigError("multigrid needs a trace order of at least 1");
    if (options.base_steps < 1) throw ConfigError("multigrid needs at least one smoothing step");
    const Mesh& mesh = *sys.mesh;
    const int N = agg.num_levels();
    if (N < 1) throw ConfigError("multigrid needs an agglomeration hierarchy");
    if (static_cast<int>(agg.level(N).macro_of_element.size()) != mesh.num_elements())
        throw ConfigError("agglomeration hierarchy does not match the mesh");

    levels_.push_back(make_level(sys.A.to_sparse(), N, sys.order, sys.block_size));
    std::vector<Unit> units;
    for (int e : sys.block_edge) units.push_back({e, false, e, false});
    if (sys.order > 1) {
        LevelOperator coarse = p_coarsen(levels_.back(), sys.order);
        levels_.push_back(std::move(coarse));
    }
    for (int k = N; k >= 2; --k) {
        std::vector<Unit> coarse_units;
        LevelOperator coarse = h_coarsen(levels_.back(), mesh, agg, units, coarse_units);
        levels_.push_back(std::move(coarse));
        units = std::move(coarse_units);
    }
    std::reverse(levels_.begin(), levels_.end());

    const int F = finest();
    for (int i = 1; i <= F; ++i) {
        LevelOperator& lv = levels_[i];
        lv.steps = options.schedule == Schedule::Constant2 ? 2 : options.base_steps << (F - i);
        if (lv.size() > 0) lv.smoother = Smoother(lv.A, options.smoother);
    }
    coarse_size_ = levels_[0].size();
    if (coarse_size_ > 0) {
        coarse_lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(Eigen::MatrixXd(levels_[0].A_sparse));
        if (!(coarse_lu_.rcond() > 1e-15)) throw NumericalError("coarsest operator is singular");
    }
}

Eigen::VectorXd MGHierarchy::prolongate(int i, const Eigen::VectorXd& coarse) const {
    const LevelOperator& lv = levels_.at(i);
    if (lv.transfer == TransferKind::None) throw Error("prolongate: level has no coarser level");
    Eigen::VectorXd e = lv.J * coarse;
    if (lv.transfer == TransferKind::HCoarsening) {
        const Eigen::VectorXd Ae = lv.A_sparse * e;
        for (std::size_t m = 0; m < lv.macro_lu.size(); ++m) {
            const auto& dofs = lv.macro_interior_dofs[m];
            Eigen::VectorXd rhs(dofs.size());
            for (std::size_t j = 0; j < dofs.size(); ++j) rhs[j] = Ae[dofs[j]];
            const Eigen::VectorXd x = lv.macro_lu[m].solve(rhs);
            for (std::size_t j = 0; j < dofs.size(); ++j) e[dofs[j]] = -x[j];
        }
    }
    return e;
}

Eigen::VectorXd MGHierarchy::restrict_residual(int i, const Eigen::VectorXd& fine) const {
    const LevelOperator& lv = levels_.at(i);
    if (lv.transfer == TransferKind::None) throw Error("restrict: level has no coarser level");
    if (lv.transfer == TransferKind::PCoarsening) return lv.J.transpose() * fine;
    const Eigen::VectorXd z = local_correct(i, fine);
    const Eigen::VectorXd w = fine - lv.A_sparse * z;
    return lv.J.transpose() * w;
}

Eigen::VectorXd MGHierarchy::local_correct(int i, const Eigen::VectorXd& residual) const {
    const LevelOperator& lv = levels_.at(i);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(residual.size());
    for (std::size_t m = 0; m < lv.macro_lu.size(); ++m) {
        const auto& dofs = lv.macro_interior_dofs[m];
        Eigen::VectorXd rhs(dofs.size());
        for (std::size_t j = 0; j < dofs.size(); ++j) rhs[j] = residual[dofs[j]];
        const Eigen::VectorXd x = lv.macro_lu[m].solve(rhs);
        for (std::size_t j = 0; j < dofs.size(); ++j) e[dofs[j]] = x[j];
    }
    return e;
}

Eigen::VectorXd MGHierarchy::vcycle(int i, const Eigen::VectorXd& r) const {
    if (i == 0) return coarse_size_ > 0 ? Eigen::VectorXd(coarse_lu_.solve(r)) : Eigen::VectorXd::Zero(r.size());
    const LevelOperator& lv = levels_.at(i);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(r.size());
    if (r.size() == 0) return e;
    const bool local = lv.transfer == TransferKind::HCoarsening;

    lv.smoother.smooth(e, r, lv.steps);
    if (local && options_.pre_local_correction) e += local_correct(i, r - lv.A_sparse * e);
    const Eigen::VectorXd rc = restrict_residual(i, r - lv.A_sparse * e);
    e += prolongate(i, vcycle(i - 1, rc));
    if (local && options_.post_local_correction) e += local_correct(i, r - lv.A_sparse * e);
    lv.smoother.smooth(e, r, lv.steps);
    return e;
}

SolveResult mg_solve(const TraceSystem& sys, const MGHierarchy& mg, double tol, int maxit) {
    SolveResult out;
    const Eigen::VectorXd& g = sys.g;
    out.x = Eigen::VectorXd::Zero(g.size());
    const double gnorm = g.norm();
    if (gnorm == 0.0) {
        out.status = SolveStatus::Converged;
        return out;
    }
    const SparseMatrix& A = mg.level(mg.finest()).A_sparse;
    Eigen::VectorXd r = g;
    for (int it = 1; it <= maxit; ++it) {
        out.x += mg.apply_preconditioner(r);
        r = g - A * out.x;
        const double rel = r.norm() / gnorm;
        out.history.push_back(rel);
        out.iterations = it;
        out.residual = rel;
        if (rel <= tol) {
            out.status = SolveStatus::Converged;
            return out;
        }
        if (!std::isfinite(rel) || rel > 1e6) {
            out.status = SolveStatus::Diverged;
            return out;
        }
    }
    out.status = SolveStatus::MaxIter;
    return out;
}

SolveResult gmres_solve(const TraceSystem& sys, const MGHierarchy* mg, double tol, int maxit) {
    const SparseMatrix A = sys.A.to_sparse();
    KrylovConfig cfg;
    cfg.tol = tol;
    cfg.maxit = maxit;
    if (mg) cfg.preconditioner = [mg](const Eigen::VectorXd& r) { return mg->apply_preconditioner(r); };
    return gmres([&A](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x; }, sys.g, cfg);
}

} // namespace hybridmg
