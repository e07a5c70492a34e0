#include "hybridmg/basis.hpp"

#include "hybridmg/error.hpp"

#include <cmath>

namespace hybridmg {

namespace {

// Lagrange polynomials through `nodes` and their derivatives at s.
void lagrange_1d(const std::vector<double>& nodes, double s, Eigen::Ref<Eigen::VectorXd> values,
                 Eigen::Ref<Eigen::VectorXd> ders) {
    const int n = static_cast<int>(nodes.size());
    for (int i = 0; i < n; ++i) {
        double v = 1.0;
        double d = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double denom = nodes[i] - nodes[j];
            // product rule, accumulated on the fly
            d = d * (s - nodes[j]) / denom + v / denom;
            v *= (s - nodes[j]) / denom;
        }
        values[i] = v;
        ders[i] = d;
    }
}

std::vector<double> gll_nodes(int order) {
    if (order == 0) return {0.5};
    return gauss_lobatto(order + 1).points;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

} // namespace

// ---------------------------------------------------------------------------
// EdgeBasis

EdgeBasis::EdgeBasis(int order) : order_(order) {
    if (order < 0) throw ConfigError("EdgeBasis: negative order");
    nodes_ = gll_nodes(order);
    rule_ = gauss_legendre(order + 2);
}

Eigen::VectorXd EdgeBasis::eval(double s) const {
    Eigen::VectorXd v(size()), d(size());
    lagrange_1d(nodes_, s, v, d);
    return v;
}

Eigen::MatrixXd EdgeBasis::eval(std::span<const double> points) const {
    Eigen::MatrixXd out(points.size(), size());
    for (std::size_t q = 0; q < points.size(); ++q) out.row(q) = eval(points[q]).transpose();
    return out;
}

Eigen::MatrixXd edge_mass_matrix(const EdgeBasis& basis, double length) {
    const Rule1D& rule = basis.rule();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    for (int q = 0; q < rule.size(); ++q) {
        const Eigen::VectorXd phi = basis.eval(rule.points[q]);
        m.noalias() += rule.weights[q] * phi * phi.transpose();
    }
    return length * m;
}

// ---------------------------------------------------------------------------
// ScalarBasis

ScalarBasis::ScalarBasis(Shape shape, int order) : shape_(shape), order_(order) {
    if (order < 0) throw ConfigError("ScalarBasis: negative order");
    gll_ = gll_nodes(order);
    if (shape == Shape::Quad) {
        size_ = (order + 1) * (order + 1);
        for (int j = 0; j <= order; ++j)
            for (int i = 0; i <= order; ++i) nodes_.emplace_back(gll_[i], gll_[j]);
        return;
    }

    size_ = (order + 1) * (order + 2) / 2;
    for (int total = 0; total <= order; ++total)
        for (int b = 0; b <= total; ++b) exponents_.push_back({total - b, b});

    // Orthonormalize the monomials on the reference triangle, then switch to
    // the nodal basis; both steps are exact linear changes of basis.
    Eigen::MatrixXd mass(size_, size_);
    for (int i = 0; i < size_; ++i)
        for (int j = 0; j < size_; ++j) {
            const int a = exponents_[i][0] + exponents_[j][0];
            const int b = exponents_[i][1] + exponents_[j][1];
            mass(i, j) = factorial(a) * factorial(b) / factorial(a + b + 2);
        }
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(mass).matrixL();
    const Eigen::MatrixXd ortho = chol.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(size_, size_)); // rows: orthonormal in monomial coefficients

    if (order == 0) {
        nodes_.emplace_back(1.0 / 3.0, 1.0 / 3.0);
    } else {
        for (int j = 0; j <= order; ++j)
            for (int i = 0; i + j <= order; ++i) {
                const int k = order - i - j;
                nodes_.emplace_back((1.0 + 2.0 * gll_[i] - gll_[j] - gll_[k]) / 3.0,
                                    (1.0 + 2.0 * gll_[j] - gll_[i] - gll_[k]) / 3.0);
            }
    }

    modal_to_nodal_ = ortho; // temporarily: orthonormal coefficients
    Eigen::MatrixXd vandermonde(size_, size_);
    Eigen::VectorXd v(size_);
    Eigen::MatrixX2d g(size_, 2);
    for (int n = 0; n < size_; ++n) {
        eval_modal(nodes_[n], v, g);
        vandermonde.row(n) = v.transpose();
    }
    const Eigen::MatrixXd inv = vandermonde.lu().inverse();
    modal_to_nodal_ = inv.transpose() * ortho;
}

void ScalarBasis::eval_modal(const Eigen::Vector2d& ref, Eigen::VectorXd& values,
                             Eigen::MatrixX2d& grads) const {
    Eigen::VectorXd mono(size_);
    Eigen::MatrixX2d dmono(size_, 2);
    for (int m = 0; m < size_; ++m) {
        const int a = exponents_[m][0];
        const int b = exponents_[m][1];
        mono[m] = std::pow(ref.x(), a) * std::pow(ref.y(), b);
        dmono(m, 0) = a == 0 ? 0.0 : a * std::pow(ref.x(), a - 1) * std::pow(ref.y(), b);
        dmono(m, 1) = b == 0 ? 0.0 : b * std::pow(ref.x(), a) * std::pow(ref.y(), b - 1);
    }
    values = modal_to_nodal_ * mono;
    grads = modal_to_nodal_ * dmono;
}

void ScalarBasis::eval(const Eigen::Vector2d& ref, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const {
    values.resize(size_);
    grads.resize(size_, 2);
    if (shape_ == Shape::Triangle) {
        eval_modal(ref, values, grads);
        return;
    }
    const int n = order_ + 1;
    Eigen::VectorXd vx(n), dx(n), vy(n), dy(n);
    lagrange_1d(gll_, ref.x(), vx, dx);
    lagrange_1d(gll_, ref.y(), vy, dy);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int k = i + n * j;
            values[k] = vx[i] * vy[j];
            grads(k, 0) = dx[i] * vy[j];
            grads(k, 1) = vx[i] * dy[j];
        }
}

Eigen::VectorXd ScalarBasis::values(const Eigen::Vector2d& ref) const {
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    eval(ref, v, g);
    return v;
}

// ---------------------------------------------------------------------------
// ElementGeometry

ElementGeometry::ElementGeometry(Shape shape, std::span<const Eigen::Vector2d> vertices) : shape_(shape) {
    if (static_cast<int>(vertices.size()) != num_vertices(shape))
        throw ConfigError("ElementGeometry: wrong vertex count");
    for (std::size_t i = 0; i < vertices.size(); ++i) vertices_[i] = vertices[i];
    if (shape == Shape::Triangle) vertices_[3] = vertices_[2];
}

Eigen::Vector2d ElementGeometry::map(const Eigen::Vector2d& r) const {
    if (shape_ == Shape::Triangle)
        return vertices_[0] + (vertices_[1] - vertices_[0]) * r.x() + (vertices_[2] - vertices_[0]) * r.y();
    return (1 - r.x()) * (1 - r.y()) * vertices_[0] + r.x() * (1 - r.y()) * vertices_[1] +
           r.x() * r.y() * vertices_[2] + (1 - r.x()) * r.y() * vertices_[3];
}

Eigen::Matrix2d ElementGeometry::jacobian(const Eigen::Vector2d& r) const {
    Eigen::Matrix2d J;
    if (shape_ == Shape::Triangle) {
        J.col(0) = vertices_[1] - vertices_[0];
        J.col(1) = vertices_[2] - vertices_[0];
        return J;
    }
    J.col(0) = (1 - r.y()) * (vertices_[1] - vertices_[0]) + r.y() * (vertices_[2] - vertices_[3]);
    J.col(1) = (1 - r.x()) * (vertices_[3] - vertices_[0]) + r.x() * (vertices_[2] - vertices_[1]);
    return J;
}

Eigen::Vector2d ElementGeometry::edge_reference_point(int e, double t) const {
    if (shape_ == Shape::Triangle) {
        switch (e) {
        case 0: return {t, 0.0};
        case 1: return {1.0 - t, t};
        default: return {0.0, 1.0 - t};
        }
    }
    switch (e) {
    case 0: return {t, 0.0};
    case 1: return {1.0, t};
    case 2: return {1.0 - t, 1.0};
    default: return {0.0, 1.0 - t};
    }
}

double ElementGeometry::edge_length(int e) const {
    const int n = num_edges();
    return (vertices_[(e + 1) % n] - vertices_[e]).norm();
}

double ElementGeometry::area() const {
    const int n = num_edges();
    double a = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& p = vertices_[i];
        const auto& q = vertices_[(i + 1) % n];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

double ElementGeometry::diameter() const {
    const int n = num_edges();
    double d = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d = std::max(d, (vertices_[i] - vertices_[j]).norm());
    return d;
}

Eigen::Vector2d ElementGeometry::centroid() const {
    const int n = num_edges();
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) c += vertices_[i];
    return c / n;
}

// ---------------------------------------------------------------------------
// Quadrature data and local operators

ElementQuadrature element_quadrature(const ScalarBasis& basis, const EdgeBasis& trace,
                                     const ElementGeometry& geom, std::span<const bool> flipped,
                                     int extra_degree) {
    const int p = std::max(basis.order(), trace.order());
    const int nb = basis.size();
    ElementQuadrature out;

    const Rule2D rule = geom.shape() == Shape::Triangle ? triangle_rule(2 * p + extra_degree)
                                                        : quad_rule(2 * p + 1 + extra_degree);
    auto& vol = out.volume;
    const int nq = rule.size();
    vol.phi.resize(nq, nb);
    vol.dphidx.resize(nq, nb);
    vol.dphidy.resize(nq, nb);
    Eigen::VectorXd v;
    Eigen::MatrixX2d g;
    for (int q = 0; q < nq; ++q) {
        const Eigen::Matrix2d J = geom.jacobian(rule.points[q]);
        const double det = J.determinant();
        if (!(det > 0.0)) throw NumericalError("element_quadrature: singular or inverted Jacobian");
        const Eigen::Matrix2d Jinv_t = J.inverse().transpose();
        basis.eval(rule.points[q], v, g);
        const Eigen::MatrixX2d gp = g * Jinv_t.transpose();
        vol.x.push_back(geom.map(rule.points[q]));
        vol.w.push_back(rule.weights[q] * det);
        vol.phi.row(q) = v.transpose();
        vol.dphidx.row(q) = gp.col(0).transpose();
        vol.dphidy.row(q) = gp.col(1).transpose();
    }

    const Rule1D erule = gauss_legendre_for_degree(2 * p + 1 + extra_degree);
    const int ne = geom.num_edges();
    out.edges.resize(ne);
    for (int e = 0; e < ne; ++e) {
        auto& ed = out.edges[e];
        const Eigen::Vector2d tangent = geom.vertex((e + 1) % ne) - geom.vertex(e);
        ed.length = tangent.norm();
        ed.normal = Eigen::Vector2d(tangent.y(), -tangent.x()) / ed.length;
        const int m = erule.size();
        ed.phi.resize(m, nb);
        ed.dphidx.resize(m, nb);
        ed.dphidy.resize(m, nb);
        ed.mu.resize(m, trace.size());
        for (int q = 0; q < m; ++q) {
            const double t = erule.points[q];
            const Eigen::Vector2d ref = geom.edge_reference_point(e, t);
            const Eigen::Matrix2d J = geom.jacobian(ref);
            basis.eval(ref, v, g);
            const Eigen::MatrixX2d gp = g * J.inverse();
            ed.x.push_back(geom.map(ref));
            ed.w.push_back(erule.weights[q] * ed.length);
            ed.phi.row(q) = v.transpose();
            ed.dphidx.row(q) = gp.col(0).transpose();
            ed.dphidy.row(q) = gp.col(1).transpose();
            ed.mu.row(q) = trace.eval(flipped[e] ? 1.0 - t : t).transpose();
        }
    }
    return out;
}

ElementOperators element_operators(const ElementQuadrature& quad, const TensorField& K) {
    const auto& vol = quad.volume;
    const int nb = static_cast<int>(vol.phi.cols());
    ElementOperators ops;
    ops.mass = Eigen::MatrixXd::Zero(nb, nb);
    ops.stiffness = Eigen::MatrixXd::Zero(nb, nb);
    ops.kinv_mass = Eigen::MatrixXd::Zero(2 * nb, 2 * nb);
    ops.div_x = Eigen::MatrixXd::Zero(nb, nb);
    ops.div_y = Eigen::MatrixXd::Zero(nb, nb);
    for (std::size_t q = 0; q < vol.x.size(); ++q) {
        const double w = vol.w[q];
        const Eigen::Matrix2d Kq = K(vol.x[q]);
        const Eigen::Matrix2d Kinv = Kq.inverse();
        const Eigen::RowVectorXd phi = vol.phi.row(q);
        const Eigen::RowVectorXd dx = vol.dphidx.row(q);
        const Eigen::RowVectorXd dy = vol.dphidy.row(q);
        const Eigen::MatrixXd pp = w * phi.transpose() * phi;
        ops.mass += pp;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) ops.kinv_mass.block(a * nb, b * nb, nb, nb) += Kinv(a, b) * pp;
        const Eigen::RowVectorXd kgx = Kq(0, 0) * dx + Kq(0, 1) * dy;
        const Eigen::RowVectorXd kgy = Kq(1, 0) * dx + Kq(1, 1) * dy;
        ops.stiffness += w * (dx.transpose() * kgx + dy.transpose() * kgy);
        ops.div_x += w * dx.transpose() * phi;
        ops.div_y += w * dy.transpose() * phi;
    }

    for (const auto& ed : quad.edges) {
        ElementOperators::Edge out;
        const int nt = static_cast<int>(ed.mu.cols());
        out.vv = Eigen::MatrixXd::Zero(nb, nb);
        out.vt = Eigen::MatrixXd::Zero(nb, nt);
        out.tt = Eigen::MatrixXd::Zero(nt, nt);
        out.flux_vv = Eigen::MatrixXd::Zero(nb, nb);
        out.flux_tv = Eigen::MatrixXd::Zero(nt, nb);
        const Eigen::Vector2d& n = ed.normal;
        for (std::size_t q = 0; q < ed.x.size(); ++q) {
            const double w = ed.w[q];
            const Eigen::Matrix2d Kq = K(ed.x[q]);
            const Eigen::Vector2d kn = Kq.transpose() * n; // (K grad phi) . n = grad phi . (K^T n)
            const Eigen::RowVectorXd phi = ed.phi.row(q);
            const Eigen::RowVectorXd mu = ed.mu.row(q);
            const Eigen::RowVectorXd flux = kn.x() * ed.dphidx.row(q) + kn.y() * ed.dphidy.row(q);
            out.vv += w * phi.transpose() * phi;
            out.vt += w * phi.transpose() * mu;
            out.tt += w * mu.transpose() * mu;
            out.flux_vv += w * phi.transpose() * flux;
            out.flux_tv += w * mu.transpose() * flux;
        }
        out.vv_nx = n.x() * out.vv;
        out.vv_ny = n.y() * out.vv;
        out.vt_nx = n.x() * out.vt;
        out.vt_ny = n.y() * out.vt;
        ops.edges.push_back(std::move(out));
    }
    return ops;
}

// ---------------------------------------------------------------------------
// RTBasis

RTBasis::RTBasis(int order, const ElementGeometry& geom) : order_(order), geom_(geom) {
    if (geom.shape() != Shape::Triangle) throw ConfigError("RT basis is only available on triangles");
    if (order < 0 || order > 1) throw ConfigError("RT basis: order must be 0 or 1");
    center_ = geom.centroid();
    scale_ = geom.diameter();
    const int n = order == 0 ? 3 : 8;
    coeffs_ = Eigen::MatrixXd::Identity(n, n);

    // Dof matrix of the raw spanning set, inverted to the canonical basis.
    Eigen::MatrixXd D(n, n);
    for (int j = 0; j < n; ++j) {
        auto raw_j = [&](const Eigen::Vector2d& x) {
            Eigen::MatrixX2d val;
            Eigen::VectorXd div;
            eval_raw(x, val, div);
            return Eigen::Vector2d(val.row(j).transpose());
        };
        D.col(j) = dofs(raw_j);
    }
    coeffs_ = D.lu().inverse();
}

void RTBasis::eval_raw(const Eigen::Vector2d& x, Eigen::MatrixX2d& val, Eigen::VectorXd& div) const {
    const double X = (x.x() - center_.x()) / scale_;
    const double Y = (x.y() - center_.y()) / scale_;
    const double s = 1.0 / scale_;
    if (order_ == 0) {
        val.resize(3, 2);
        div.resize(3);
        val << 1, 0, 0, 1, X, Y;
        div << 0, 0, 2 * s;
        return;
    }
    val.resize(8, 2);
    div.resize(8);
    val << 1, 0, X, 0, Y, 0, 0, 1, 0, X, 0, Y, X * X, X * Y, X * Y, Y * Y;
    div << 0, s, 0, 0, 0, s, 3 * X * s, 3 * Y * s;
}

void RTBasis::eval(const Eigen::Vector2d& x, Eigen::MatrixX2d& values, Eigen::VectorXd& div) const {
    Eigen::MatrixX2d raw;
    Eigen::VectorXd rdiv;
    eval_raw(x, raw, rdiv);
    values = coeffs_.transpose() * raw;
    div = coeffs_.transpose() * rdiv;
}

Eigen::VectorXd RTBasis::dofs(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& v) const {
    const EdgeBasis trace(order_);
    const Rule1D erule = gauss_legendre(order_ + 4);
    const int n = order_ == 0 ? 3 : 8;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int e = 0; e < 3; ++e) {
        const Eigen::Vector2d a = geom_.vertex(e);
        const Eigen::Vector2d b = geom_.vertex((e + 1) % 3);
        const Eigen::Vector2d t = b - a;
        const Eigen::Vector2d normal(t.y() / t.norm(), -t.x() / t.norm());
        for (int q = 0; q < erule.size(); ++q) {
            const double s = erule.points[q];
            const Eigen::VectorXd mu = trace.eval(s);
            const double vn = v(a + s * t).dot(normal);
            out.segment(e * trace.size(), trace.size()) += erule.weights[q] * t.norm() * vn * mu;
        }
    }
    if (order_ == 1) {
        const Rule2D rule = triangle_rule(6);
        const double area = geom_.area();
        for (int q = 0; q < rule.size(); ++q) {
            const Eigen::Vector2d val = v(geom_.map(rule.points[q]));
            out.tail<2>() += 2.0 * area * rule.weights[q] * val;
        }
    }
    return out;
}

Eigen::Vector2d RTBasis::interpolate(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& v,
                                     const Eigen::Vector2d& x) const {
    const Eigen::VectorXd d = dofs(v);
    Eigen::MatrixX2d val;
    Eigen::VectorXd div;
    eval(x, val, div);
    return val.transpose() * d;
}

} // namespace hybridmg
