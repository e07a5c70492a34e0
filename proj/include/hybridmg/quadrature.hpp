#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hybridmg {

/// Points and weights on the unit interval [0,1].
struct Rule1D {
    std::vector<double> points;
    std::vector<double> weights;
    int size() const { return static_cast<int>(points.size()); }
};

/// Points and weights on a 2D reference cell.
struct Rule2D {
    std::vector<Eigen::Vector2d> points;
    std::vector<double> weights;
    int size() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule on [0,1], exact for degree 2n-1.
Rule1D gauss_legendre(int n);

/// n-point Gauss-Lobatto-Legendre rule on [0,1] (n >= 2), endpoints included.
Rule1D gauss_lobatto(int n);

/// Smallest Gauss-Legendre rule exact for polynomials of the given degree.
Rule1D gauss_legendre_for_degree(int degree);

/// Tensor Gauss rule on [0,1]^2 exact for Q^degree.
Rule2D quad_rule(int degree);

/// Collapsed (Duffy) Gauss rule on the reference triangle (0,0),(1,0),(0,1),
/// exact for P^degree.
Rule2D triangle_rule(int degree);

} // namespace hybridmg
