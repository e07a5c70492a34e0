#pragma once

#include "hybridmg/quadrature.hpp"

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <span>
#include <vector>

namespace hybridmg {

enum class Shape { Triangle, Quad };

inline int num_vertices(Shape s) { return s == Shape::Triangle ? 3 : 4; }

/// Nodal Lagrange basis of order p on [0,1] at Gauss-Lobatto points.
/// Order 0 is the constant function with its node at the midpoint.
class EdgeBasis {
public:
    explicit EdgeBasis(int order);

    int order() const { return order_; }
    int size() const { return order_ + 1; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// Row per point, column per basis function.
    Eigen::MatrixXd eval(std::span<const double> points) const;
    Eigen::VectorXd eval(double s) const;

    /// Gauss-Legendre rule with p+2 points (exact to degree 2p+3).
    const Rule1D& rule() const { return rule_; }

private:
    int order_;
    std::vector<double> nodes_;
    Rule1D rule_;
};

/// Edge mass matrix, scaled by the physical edge length.
Eigen::MatrixXd edge_mass_matrix(const EdgeBasis& basis, double length);

/// Scalar nodal basis on a reference element: tensor Q^p at GLL nodes on the
/// unit square, total-degree P^p on the unit triangle with nodes whose edge
/// restriction coincides with the 1D GLL nodes.
class ScalarBasis {
public:
    ScalarBasis(Shape shape, int order);

    Shape shape() const { return shape_; }
    int order() const { return order_; }
    int size() const { return size_; }
    const std::vector<Eigen::Vector2d>& nodes() const { return nodes_; }

    /// Values (size) and reference gradients (size x 2) at a reference point.
    void eval(const Eigen::Vector2d& ref, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;
    Eigen::VectorXd values(const Eigen::Vector2d& ref) const;

private:
    void eval_modal(const Eigen::Vector2d& ref, Eigen::VectorXd& values, Eigen::MatrixX2d& grads) const;

    Shape shape_;
    int order_;
    int size_ = 0;
    std::vector<Eigen::Vector2d> nodes_;
    // quad: 1D GLL nodes; triangle: monomial exponents and nodal coefficients
    std::vector<double> gll_;
    std::vector<std::array<int, 2>> exponents_;
    Eigen::MatrixXd modal_to_nodal_;
};

/// Reference-to-physical map of a straight-sided triangle or bilinear quad.
class ElementGeometry {
public:
    ElementGeometry(Shape shape, std::span<const Eigen::Vector2d> vertices);

    Shape shape() const { return shape_; }
    int num_edges() const { return num_vertices(shape_); }
    const Eigen::Vector2d& vertex(int i) const { return vertices_[i]; }

    Eigen::Vector2d map(const Eigen::Vector2d& ref) const;
    Eigen::Matrix2d jacobian(const Eigen::Vector2d& ref) const;

    /// Reference point of local edge e (from vertex e to vertex e+1) at parameter t.
    Eigen::Vector2d edge_reference_point(int e, double t) const;
    double edge_length(int e) const;

    double area() const;
    double diameter() const;
    Eigen::Vector2d centroid() const;

private:
    Shape shape_;
    std::array<Eigen::Vector2d, 4> vertices_;
};

using TensorField = std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>;
using ScalarField = std::function<double(const Eigen::Vector2d&)>;

/// Physical quadrature data for one element: volume points plus, for each
/// local edge, edge points with outward normals and the trace basis evaluated
/// in the global edge orientation.
struct ElementQuadrature {
    struct Volume {
        std::vector<Eigen::Vector2d> x;
        std::vector<double> w; // includes |det J|
        Eigen::MatrixXd phi;   // points x basis
        Eigen::MatrixXd dphidx;
        Eigen::MatrixXd dphidy;
    } volume;

    struct Edge {
        std::vector<Eigen::Vector2d> x;
        std::vector<double> w; // includes ds
        Eigen::Vector2d normal;
        Eigen::MatrixXd phi; // points x volume basis
        Eigen::MatrixXd dphidx;
        Eigen::MatrixXd dphidy;
        Eigen::MatrixXd mu; // points x trace basis
        double length = 0.0;
    };
    std::vector<Edge> edges;
};

/// `flipped[e]` is true when local edge e runs against its global orientation.
/// `extra_degree` over-integrates beyond the exact polynomial degree.
ElementQuadrature element_quadrature(const ScalarBasis& basis, const EdgeBasis& trace,
                                     const ElementGeometry& geom, std::span<const bool> flipped,
                                     int extra_degree = 2);

/// Local matrices shared by the hybridized schemes. Row index is the test
/// function, column index the trial function.
struct ElementOperators {
    Eigen::MatrixXd mass;        // (phi_j, phi_i)
    Eigen::MatrixXd stiffness;   // (K grad phi_j, grad phi_i)
    Eigen::MatrixXd kinv_mass;   // 2n x 2n, (K^{-1} u_j, v_i) over vector copies [x-block; y-block]
    Eigen::MatrixXd div_x;       // (phi_j, d/dx phi_i)
    Eigen::MatrixXd div_y;       // (phi_j, d/dy phi_i)
    struct Edge {
        Eigen::MatrixXd vv;        // <phi_j, phi_i>
        Eigen::MatrixXd vv_nx;     // <phi_j n_x, phi_i>
        Eigen::MatrixXd vv_ny;     // <phi_j n_y, phi_i>
        Eigen::MatrixXd vt;        // <mu_j, phi_i>
        Eigen::MatrixXd vt_nx;     // <mu_j n_x, phi_i>
        Eigen::MatrixXd vt_ny;     // <mu_j n_y, phi_i>
        Eigen::MatrixXd tt;        // <mu_j, mu_i>
        Eigen::MatrixXd flux_vv;   // <K grad phi_j . n, phi_i>
        Eigen::MatrixXd flux_tv;   // <K grad phi_j . n, mu_i>  (trace rows)
    };
    std::vector<Edge> edges;
};

ElementOperators element_operators(const ElementQuadrature& quad, const TensorField& K);

/// Raviart-Thomas space RT_k (k = 0, 1) on a physical triangle with the
/// canonical basis dual to edge-normal moments against the edge trace basis
/// (in local edge orientation) and, for k = 1, interior moments against constants.
class RTBasis {
public:
    RTBasis(int order, const ElementGeometry& geom);

    int order() const { return order_; }
    int size() const { return static_cast<int>(coeffs_.cols()); }

    /// Values (size x 2) and divergence (size) at a physical point.
    void eval(const Eigen::Vector2d& x, Eigen::MatrixX2d& values, Eigen::VectorXd& div) const;

    /// Degrees of freedom of a vector field (edge-normal moments, interior moments).
    Eigen::VectorXd dofs(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& v) const;

    /// Canonical interpolant of v evaluated at x.
    Eigen::Vector2d interpolate(const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& v,
                                const Eigen::Vector2d& x) const;

private:
    void eval_raw(const Eigen::Vector2d& x, Eigen::MatrixX2d& values, Eigen::VectorXd& div) const;

    int order_;
    ElementGeometry geom_;
    Eigen::Vector2d center_;
    double scale_;
    Eigen::MatrixXd coeffs_; // raw -> canonical
};

} // namespace hybridmg
