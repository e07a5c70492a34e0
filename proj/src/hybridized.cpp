#include "hybridmg/hybridized.hpp"

#include "hybridmg/error.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

namespace hybridmg {

namespace {

ElementQuadrature quadrature_for(const ElementContext& ctx, int scalar_order, const EdgeBasis& trace) {
    const ScalarBasis basis(ctx.geom.shape(), scalar_order);
    return element_quadrature(basis, trace, ctx.geom, std::span<const bool>(ctx.flipped.data(), ctx.geom.num_edges()));
}

Eigen::VectorXd load_vector(const ElementQuadrature& quad, const ScalarField& f, double& total) {
    const auto& vol = quad.volume;
    Eigen::VectorXd F = Eigen::VectorXd::Zero(vol.phi.cols());
    total = 0.0;
    for (std::size_t q = 0; q < vol.x.size(); ++q) {
        const double fw = f(vol.x[q]) * vol.w[q];
        F += fw * vol.phi.row(q).transpose();
        total += fw;
    }
    return F;
}

} // namespace

double edge_hmin(const Mesh& mesh, int edge, HminRule rule) {
    const Edge& e = mesh.edge(edge);
    auto h = [&](int elem) {
        const ElementGeometry g = mesh.geometry(elem);
        if (rule == HminRule::Diameter) return g.diameter();
        double s = g.edge_length(0);
        for (int i = 1; i < g.num_edges(); ++i) s = std::min(s, g.edge_length(i));
        return s;
    };
    double v = h(e.left);
    if (!e.boundary()) v = std::min(v, h(e.right));
    return v;
}

double edge_kappa(const Mesh& mesh, int edge, const ProblemSpec& problem) {
    const Edge& e = mesh.edge(edge);
    const Eigen::Vector2d mid = mesh.edge_point(edge, 0.5);
    auto sample = [&](int elem) { return problem.kappa_at(mid + 1e-9 * (mesh.centroid(elem) - mid)); };
    if (e.boundary()) return sample(e.left);
    return 0.5 * (sample(e.left) + sample(e.right));
}

ElementContext element_context(const Mesh& mesh, int elem, const ProblemSpec& problem, const MethodConfig& method,
                               Scheme scheme) {
    ElementContext ctx{mesh.geometry(elem)};
    const Element& el = mesh.element(elem);
    ctx.flipped = el.flipped;
    ctx.order = method.order;
    ctx.id = elem;
    if (scheme != Scheme::RT) {
        const Stabilization& st = method.stabilization(scheme);
        for (int e = 0; e < el.num_vertices(); ++e) {
            const int ge = el.edges[e];
            const bool needs_kappa = st.rule == TauRule::KappaInvHmin || st.rule == TauRule::KappaIpdg;
            ctx.tau[e] = st.value(method.order, edge_hmin(mesh, ge, method.hmin),
                                  needs_kappa ? edge_kappa(mesh, ge, problem) : 1.0);
        }
    }
    return ctx;
}

// ---------------------------------------------------------------------------
// Local systems

LocalSystem local_system_hdg(const ElementContext& ctx, const ProblemSpec& problem) {
    const int p = ctx.order;
    if (p < 0) throw ConfigError("HDG needs order >= 0");
    const EdgeBasis trace(p);
    const ElementQuadrature quad = quadrature_for(ctx, p, trace);
    const ElementOperators ops = element_operators(quad, problem.K);
    const int nb = static_cast<int>(ops.mass.rows());
    const int nt = trace.size();
    const int ne = ctx.geom.num_edges();

    LocalSystem s;
    s.q_offset = 2 * nb;
    s.q_size = nb;
    s.trace_size = nt;
    s.K = Eigen::MatrixXd::Zero(3 * nb, 3 * nb);
    s.C = Eigen::MatrixXd::Zero(3 * nb, ne * nt);
    s.E = Eigen::MatrixXd::Zero(ne * nt, 3 * nb);
    s.G = Eigen::MatrixXd::Zero(ne * nt, ne * nt);
    s.F = Eigen::VectorXd::Zero(3 * nb);

    s.K.topLeftCorner(2 * nb, 2 * nb) = ops.kinv_mass;
    s.K.block(0, 2 * nb, nb, nb) = -ops.div_x;
    s.K.block(nb, 2 * nb, nb, nb) = -ops.div_y;
    s.K.block(2 * nb, 0, nb, nb) = -ops.div_x;
    s.K.block(2 * nb, nb, nb, nb) = -ops.div_y;
    for (int e = 0; e < ne; ++e) {
        const auto& ed = ops.edges[e];
        const double tau = ctx.tau[e];
        s.K.block(2 * nb, 0, nb, nb) += ed.vv_nx;
        s.K.block(2 * nb, nb, nb, nb) += ed.vv_ny;
        s.K.block(2 * nb, 2 * nb, nb, nb) += tau * ed.vv;
        s.C.block(0, e * nt, nb, nt) = ed.vt_nx;
        s.C.block(nb, e * nt, nb, nt) = ed.vt_ny;
        s.C.block(2 * nb, e * nt, nb, nt) = -tau * ed.vt;
        s.E.block(e * nt, 0, nt, nb) = ed.vt_nx.transpose();
        s.E.block(e * nt, nb, nt, nb) = ed.vt_ny.transpose();
        s.E.block(e * nt, 2 * nb, nt, nb) = tau * ed.vt.transpose();
        s.G.block(e * nt, e * nt, nt, nt) = -tau * ed.tt;
    }
    s.F.segment(2 * nb, nb) = load_vector(quad, problem.f, s.source_integral);
    return s;
}

LocalSystem local_system_ipdg(const ElementContext& ctx, const ProblemSpec& problem, int symmetry) {
    const int p = ctx.order;
    if (p < 1) throw ConfigError("interior-penalty schemes need order >= 1");
    const EdgeBasis trace(p);
    const ElementQuadrature quad = quadrature_for(ctx, p, trace);
    const ElementOperators ops = element_operators(quad, problem.K);
    const int nb = static_cast<int>(ops.mass.rows());
    const int nt = trace.size();
    const int ne = ctx.geom.num_edges();
    const double sf = symmetry;

    LocalSystem s;
    s.q_offset = 0;
    s.q_size = nb;
    s.trace_size = nt;
    s.K = ops.stiffness;
    s.C = Eigen::MatrixXd::Zero(nb, ne * nt);
    s.E = Eigen::MatrixXd::Zero(ne * nt, nb);
    s.G = Eigen::MatrixXd::Zero(ne * nt, ne * nt);
    for (int e = 0; e < ne; ++e) {
        const auto& ed = ops.edges[e];
        const double tau = ctx.tau[e];
        s.K += -sf * ed.flux_vv.transpose() - ed.flux_vv + tau * ed.vv;
        s.C.block(0, e * nt, nb, nt) = sf * ed.flux_tv.transpose() - tau * ed.vt;
        s.E.block(e * nt, 0, nt, nb) = -ed.flux_tv + tau * ed.vt.transpose();
        s.G.block(e * nt, e * nt, nt, nt) = -tau * ed.tt;
    }
    s.F = load_vector(quad, problem.f, s.source_integral);
    return s;
}

LocalSystem local_system_rth(const ElementContext& ctx, const ProblemSpec& problem) {
    if (ctx.geom.shape() != Shape::Triangle)
        throw ConfigError("RT-H is only available on triangles (element " + std::to_string(ctx.id) + ")");
    const int k = ctx.order;
    if (k < 0 || k > 1) throw ConfigError("RT-H supports orders 0 and 1");
    const EdgeBasis trace(k);
    const ElementQuadrature quad = quadrature_for(ctx, k, trace);
    const RTBasis rt(k, ctx.geom);
    const int nu = rt.size();
    const int nq = static_cast<int>(quad.volume.phi.cols());
    const int nt = trace.size();
    const int ne = 3;

    LocalSystem s;
    s.q_offset = nu;
    s.q_size = nq;
    s.trace_size = nt;
    s.K = Eigen::MatrixXd::Zero(nu + nq, nu + nq);
    s.C = Eigen::MatrixXd::Zero(nu + nq, ne * nt);
    s.F = Eigen::VectorXd::Zero(nu + nq);
    s.G = Eigen::MatrixXd::Zero(ne * nt, ne * nt);

    Eigen::MatrixX2d psi;
    Eigen::VectorXd div;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nq, nu);
    const auto& vol = quad.volume;
    for (std::size_t q = 0; q < vol.x.size(); ++q) {
        rt.eval(vol.x[q], psi, div);
        const Eigen::Matrix2d Kinv = problem.K(vol.x[q]).inverse();
        s.K.topLeftCorner(nu, nu) += vol.w[q] * psi * Kinv * psi.transpose();
        B += vol.w[q] * vol.phi.row(q).transpose() * div.transpose();
    }
    s.K.block(0, nu, nu, nq) = -B.transpose();
    s.K.block(nu, 0, nq, nu) = B;
    for (int e = 0; e < ne; ++e) {
        const auto& ed = quad.edges[e];
        for (std::size_t q = 0; q < ed.x.size(); ++q) {
            rt.eval(ed.x[q], psi, div);
            const Eigen::VectorXd psin = psi * ed.normal;
            s.C.block(0, e * nt, nu, nt) += ed.w[q] * psin * ed.mu.row(q);
        }
    }
    s.E = s.C.topRows(nu).transpose();
    s.E.conservativeResize(ne * nt, nu + nq);
    s.E.rightCols(nq).setZero();
    s.F.segment(nu, nq) = load_vector(quad, problem.f, s.source_integral);
    return s;
}

LocalDtN condense(const LocalSystem& sys, Scheme scheme, int elem_id) {
    // Row then column equilibration, K = Dr^-1 Ks Dc^-1.
    // A row or column that vanishes relative to the largest one counts as singular.
    const Eigen::VectorXd rmax = sys.K.cwiseAbs().rowwise().maxCoeff();
    const Eigen::VectorXd dr = rmax.cwiseMax(1e-300).cwiseInverse();
    const Eigen::MatrixXd Kr = dr.asDiagonal() * sys.K;
    const Eigen::VectorXd cmax = Kr.cwiseAbs().colwise().maxCoeff().transpose();
    const Eigen::VectorXd dc = cmax.cwiseMax(1e-300).cwiseInverse();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(Kr * dc.asDiagonal());
    double scale = 0.0;
    for (const Eigen::MatrixXd* m : {&sys.K, &sys.C, &sys.E})
        if (m->size() > 0) scale = std::max(scale, m->cwiseAbs().maxCoeff());
    const bool degenerate = sys.K.size() > 0 && (rmax.minCoeff() <= 1e-13 * scale || cmax.minCoeff() <= 1e-13);
    const double rc = degenerate ? 0.0 : lu.rcond();
    if (!(rc > 1e-14)) {
        std::ostringstream msg;
        msg << "singular local block on element " << elem_id << " (" << scheme_name(scheme) << ", rcond " << rc
            << "); check the stabilization";
        throw NumericalError(msg.str());
    }
    auto solve = [&](const Eigen::MatrixXd& rhs) -> Eigen::MatrixXd {
        return dc.asDiagonal() * lu.solve(dr.asDiagonal() * rhs);
    };
    LocalDtN out;
    out.scheme = scheme;
    const Eigen::MatrixXd KinvC = solve(sys.C);
    const Eigen::VectorXd KinvF = solve(sys.F);
    out.S = sys.E * KinvC - sys.G;
    out.b = sys.E * KinvF;
    out.L = -KinvC;
    out.R = KinvF;
    out.q_offset = sys.q_offset;
    out.q_size = sys.q_size;
    out.trace_size = sys.trace_size;
    out.source_integral = sys.source_integral;
    return out;
}

LocalDtN condense_hdg(const ElementContext& ctx, const ProblemSpec& problem) {
    return condense(local_system_hdg(ctx, problem), Scheme::HDG, ctx.id);
}

LocalDtN condense_ipdg(const ElementContext& ctx, const ProblemSpec& problem, Scheme scheme) {
    return condense(local_system_ipdg(ctx, problem, symmetry_flag(scheme)), scheme, ctx.id);
}

LocalDtN condense_rth(const ElementContext& ctx, const ProblemSpec& problem) {
    return condense(local_system_rth(ctx, problem), Scheme::RT, ctx.id);
}

// ---------------------------------------------------------------------------
// Global trace system

std::vector<Scheme> resolve_schemes(const Mesh& mesh, const MethodConfig& method) {
    const int ne = mesh.num_elements();
    if (!method.element_schemes.empty()) {
        if (static_cast<int>(method.element_schemes.size()) != ne)
            throw ConfigError("per-element scheme list does not match the mesh");
        return method.element_schemes;
    }
    std::vector<Scheme> out(ne, method.scheme);
    for (int e = 0; e < ne; ++e) {
        const std::string& tag = mesh.element(e).tag;
        if (tag.empty()) continue;
        auto it = method.tag_schemes.find(tag);
        out[e] = it != method.tag_schemes.end() ? it->second : parse_scheme(tag);
    }
    return out;
}

bool TraceSystem::symmetric_scheme() const {
    for (Scheme s : element_scheme)
        if (s == Scheme::NIPG || s == Scheme::IIPG) return false;
    return true;
}

TraceSystem assemble_trace(const Mesh& mesh, const ProblemSpec& problem, const MethodConfig& method) {
    return assemble_trace(std::make_shared<const Mesh>(mesh), problem, method);
}

TraceSystem assemble_trace(std::shared_ptr<const Mesh> mesh_ptr, const ProblemSpec& problem,
                           const MethodConfig& method) {
    const Mesh& mesh = *mesh_ptr;
    TraceSystem sys;
    sys.mesh = mesh_ptr;
    sys.order = method.order;
    sys.block_size = method.order + 1;
    sys.element_scheme = resolve_schemes(mesh, method);

    const EdgeBasis trace(method.order);
    const int nt = trace.size();
    sys.edge_block.assign(mesh.num_edges(), -1);
    sys.dirichlet.assign(mesh.num_edges(), Eigen::VectorXd());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (mesh.edge(e).boundary()) {
            Eigen::VectorXd vals(nt);
            for (int m = 0; m < nt; ++m) vals[m] = problem.dirichlet(mesh.edge_point(e, trace.nodes()[m]));
            sys.dirichlet[e] = vals;
            continue;
        }
        sys.edge_block[e] = static_cast<int>(sys.block_edge.size());
        sys.block_edge.push_back(e);
    }
    const int nblocks = static_cast<int>(sys.block_edge.size());
    BlockSparseBuilder builder(std::vector<int>(nblocks, nt));
    sys.g = Eigen::VectorXd::Zero(nblocks * nt);

    sys.locals.reserve(mesh.num_elements());
    for (int id = 0; id < mesh.num_elements(); ++id) {
        const Scheme scheme = sys.element_scheme[id];
        const ElementContext ctx = element_context(mesh, id, problem, method, scheme);
        LocalDtN dtn;
        switch (scheme) {
        case Scheme::HDG: dtn = condense_hdg(ctx, problem); break;
        case Scheme::RT: dtn = condense_rth(ctx, problem); break;
        default: dtn = condense_ipdg(ctx, problem, scheme); break;
        }
        if (dtn.trace_size != nt) throw ConfigError("trace order mismatch on element " + std::to_string(id));

        const Element& el = mesh.element(id);
        const int nl = el.num_vertices();
        for (int a = 0; a < nl; ++a) {
            const int ba = sys.edge_block[el.edges[a]];
            if (ba < 0) continue;
            Eigen::VectorXd rhs = dtn.b.segment(a * nt, nt);
            for (int c = 0; c < nl; ++c) {
                const int bc = sys.edge_block[el.edges[c]];
                const Eigen::MatrixXd blk = dtn.S.block(a * nt, c * nt, nt, nt);
                if (bc >= 0)
                    builder.add(ba, bc, blk);
                else
                    rhs -= blk * sys.dirichlet[el.edges[c]];
            }
            sys.g.segment(ba * nt, nt) += rhs;
        }
        sys.locals.push_back(std::move(dtn));
    }
    sys.A = builder.build();
    return sys;
}

Eigen::VectorXd element_trace(const TraceSystem& sys, int elem, const Eigen::VectorXd& lambda) {
    const Element& el = sys.mesh->element(elem);
    const int nt = sys.block_size;
    Eigen::VectorXd out(el.num_vertices() * nt);
    for (int a = 0; a < el.num_vertices(); ++a) {
        const int ge = el.edges[a];
        const int b = sys.edge_block[ge];
        out.segment(a * nt, nt) = b >= 0 ? Eigen::VectorXd(lambda.segment(b * nt, nt)) : sys.dirichlet[ge];
    }
    return out;
}

VolumeSolution recover_volume(const TraceSystem& sys, const Eigen::VectorXd& lambda) {
    if (lambda.size() != sys.size()) throw Error("recover_volume: trace vector has the wrong size");
    VolumeSolution sol;
    sol.x.reserve(sys.locals.size());
    for (int e = 0; e < static_cast<int>(sys.locals.size()); ++e) {
        const LocalDtN& d = sys.locals[e];
        sol.x.push_back(d.L * element_trace(sys, e, lambda) + d.R);
    }
    return sol;
}

Eigen::VectorXd element_flux_moments(const TraceSystem& sys, int elem, const Eigen::VectorXd& lambda) {
    const LocalDtN& d = sys.locals[elem];
    return d.b - d.S * element_trace(sys, elem, lambda);
}

double conservation_defect(const TraceSystem& sys, int elem, const Eigen::VectorXd& lambda) {
    return element_flux_moments(sys, elem, lambda).sum() - sys.locals[elem].source_integral;
}

ScalarBasis scalar_basis_for(const TraceSystem& sys, int elem) {
    return ScalarBasis(sys.mesh->element(elem).shape, sys.order);
}

double l2_error(const TraceSystem& sys, const VolumeSolution& sol, const ScalarField& exact) {
    if (!exact) throw ConfigError("l2_error needs an exact solution");
    double total = 0.0;
    for (int e = 0; e < sys.mesh->num_elements(); ++e) {
        const ScalarBasis basis = scalar_basis_for(sys, e);
        const ElementGeometry geom = sys.mesh->geometry(e);
        const int deg = 2 * std::max(sys.order, 1) + 4;
        const Rule2D rule = geom.shape() == Shape::Triangle ? triangle_rule(deg) : quad_rule(deg);
        const LocalDtN& d = sys.locals[e];
        const Eigen::VectorXd q = sol.x[e].segment(d.q_offset, d.q_size);
        for (int k = 0; k < rule.size(); ++k) {
            const Eigen::Vector2d& r = rule.points[k];
            const double qh = basis.values(r).dot(q);
            const double diff = qh - exact(geom.map(r));
            total += rule.weights[k] * std::abs(geom.jacobian(r).determinant()) * diff * diff;
        }
    }
    return std::sqrt(total);
}

Eigen::VectorXd solve_direct(const TraceSystem& sys) {
    if (sys.size() == 0) return Eigen::VectorXd();
    Eigen::SparseMatrix<double> a = sys.A.to_sparse();
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw NumericalError("direct trace solve failed: " + lu.lastErrorMessage());
    return lu.solve(sys.g);
}

} // namespace hybridmg
