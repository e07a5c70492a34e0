#pragma once

#include "hybridmg/basis.hpp"

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace hybridmg {

struct Element {
    Shape shape = Shape::Quad;
    std::array<int, 4> v{-1, -1, -1, -1};
    std::array<int, 4> edges{-1, -1, -1, -1};
    std::array<bool, 4> flipped{false, false, false, false}; // local edge runs against the global edge
    std::string tag;

    int num_vertices() const { return hybridmg::num_vertices(shape); }
};

/// Skeleton edge, oriented as traversed by its left (lower-id) element.
struct Edge {
    std::array<int, 2> v{-1, -1};
    int left = -1;
    int left_local = -1;
    int right = -1; // -1 on the domain boundary
    int right_local = -1;

    bool boundary() const { return right < 0; }
};

struct ElementInput {
    Shape shape = Shape::Quad;
    std::vector<int> v;
    std::string tag;
};

class Mesh {
public:
    Mesh() = default;

    /// Builds the skeleton from connectivity. Clockwise elements are reoriented.
    Mesh(std::vector<Eigen::Vector2d> vertices, const std::vector<ElementInput>& elements);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_elements() const { return static_cast<int>(elements_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    int num_boundary_edges() const;

    const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }
    const std::vector<Element>& elements() const { return elements_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Eigen::Vector2d& vertex(int i) const { return vertices_[i]; }
    const Element& element(int i) const { return elements_[i]; }
    const Edge& edge(int i) const { return edges_[i]; }

    ElementGeometry geometry(int elem) const;
    Eigen::Vector2d centroid(int elem) const;
    Eigen::Vector2d edge_point(int edge, double t) const;
    double edge_length(int edge) const;

    /// Elements sharing an edge with `elem`, in local edge order.
    std::vector<int> neighbors(int elem) const;

    /// Element containing p (closed), or -1.
    int locate(const Eigen::Vector2d& p, double tol = 1e-12) const;

    void set_tag(int elem, std::string tag) { elements_[elem].tag = std::move(tag); }

private:
    std::vector<Eigen::Vector2d> vertices_;
    std::vector<Element> elements_;
    std::vector<Edge> edges_;
};

/// n x n unit-square quads, row-major.
Mesh build_structured_quad_mesh(int n);

/// n x n unit-square cells, each cut into two triangles along the (0,0)-(1,1) diagonal.
Mesh build_structured_tri_mesh(int n);

/// Unit disk triangulated by concentric rings of vertices around the centre.
Mesh build_disk_mesh(const std::vector<int>& ring_counts);

/// Triangulated unit box with eight square holes, n cells per side (n divisible by 8).
Mesh build_box_with_holes(int n);

Mesh parse_mesh(std::istream& in);
Mesh import_tri_mesh(const std::string& path);
void write_mesh(std::ostream& out, const Mesh& mesh);

} // namespace hybridmg
