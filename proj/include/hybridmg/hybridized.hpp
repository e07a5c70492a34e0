#pragma once

#include "hybridmg/block_sparse.hpp"
#include "hybridmg/mesh.hpp"
#include "hybridmg/problem.hpp"

#include <memory>
#include <vector>

namespace hybridmg {

/// Geometry, trace orientation and per-edge stabilization of one element.
struct ElementContext {
    ElementGeometry geom;
    std::array<bool, 4> flipped{false, false, false, false};
    std::array<double, 4> tau{0.0, 0.0, 0.0, 0.0};
    int order = 1;
    int id = -1;
};

/// h_min of an edge over its adjacent elements.
double edge_hmin(const Mesh& mesh, int edge, HminRule rule);

/// kappa averaged over the sides of an edge, sampled next to its midpoint.
double edge_kappa(const Mesh& mesh, int edge, const ProblemSpec& problem);

/// Context with tau from the stabilization rule of `scheme` (zero for RT).
ElementContext element_context(const Mesh& mesh, int elem, const ProblemSpec& problem, const MethodConfig& method,
                               Scheme scheme);

/// Uncondensed local system K x + C lambda = F with conservation rows
/// <u_hat . n, mu> = E x + G lambda. Unknown layout: HDG [ux, uy, q],
/// interior-penalty [q], RT [u, q].
struct LocalSystem {
    Eigen::MatrixXd K, C, E, G;
    Eigen::VectorXd F;
    int q_offset = 0;
    int q_size = 0;
    int trace_size = 0; // per edge
    double source_integral = 0.0;
};

LocalSystem local_system_hdg(const ElementContext& ctx, const ProblemSpec& problem);
LocalSystem local_system_ipdg(const ElementContext& ctx, const ProblemSpec& problem, int symmetry);
LocalSystem local_system_rth(const ElementContext& ctx, const ProblemSpec& problem);

/// Condensed element: x = L lambda + R, outward flux moments = b - S lambda.
struct LocalDtN {
    Scheme scheme = Scheme::HDG;
    Eigen::MatrixXd S, L;
    Eigen::VectorXd b, R;
    int q_offset = 0;
    int q_size = 0;
    int trace_size = 0;
    double source_integral = 0.0;
};

LocalDtN condense(const LocalSystem& sys, Scheme scheme, int elem_id = -1);
LocalDtN condense_hdg(const ElementContext& ctx, const ProblemSpec& problem);
LocalDtN condense_ipdg(const ElementContext& ctx, const ProblemSpec& problem, Scheme scheme);
LocalDtN condense_rth(const ElementContext& ctx, const ProblemSpec& problem);

std::vector<Scheme> resolve_schemes(const Mesh& mesh, const MethodConfig& method);

/// Global trace system over the non-Dirichlet edges.
struct TraceSystem {
    std::shared_ptr<const Mesh> mesh;
    int order = 1;
    int block_size = 2;
    BlockSparseMatrix A;
    Eigen::VectorXd g;
    std::vector<int> edge_block;           // -1 on Dirichlet edges
    std::vector<int> block_edge;           // inverse map
    std::vector<Eigen::VectorXd> dirichlet; // nodal values on Dirichlet edges
    std::vector<Scheme> element_scheme;
    std::vector<LocalDtN> locals;

    int size() const { return A.rows(); }
    /// True when every element uses a scheme with a symmetric trace operator.
    bool symmetric_scheme() const;
};

TraceSystem assemble_trace(std::shared_ptr<const Mesh> mesh, const ProblemSpec& problem, const MethodConfig& method);
TraceSystem assemble_trace(const Mesh& mesh, const ProblemSpec& problem, const MethodConfig& method);

/// lambda on the boundary of one element (free values from `lambda`, Dirichlet from the system).
Eigen::VectorXd element_trace(const TraceSystem& sys, int elem, const Eigen::VectorXd& lambda);

struct VolumeSolution {
    std::vector<Eigen::VectorXd> x; // per element local unknowns
};

VolumeSolution recover_volume(const TraceSystem& sys, const Eigen::VectorXd& lambda);

/// Outward flux moments against the trace basis of each local edge.
Eigen::VectorXd element_flux_moments(const TraceSystem& sys, int elem, const Eigen::VectorXd& lambda);

/// Sum of outward fluxes minus the source integral.
double conservation_defect(const TraceSystem& sys, int elem, const Eigen::VectorXd& lambda);

/// Element-local scalar basis used for q.
ScalarBasis scalar_basis_for(const TraceSystem& sys, int elem);

/// sqrt(sum_T int_T (q_h - q)^2).
double l2_error(const TraceSystem& sys, const VolumeSolution& sol, const ScalarField& exact);

/// Dense direct solve of the trace system (for small systems and tests).
Eigen::VectorXd solve_direct(const TraceSystem& sys);

} // namespace hybridmg
