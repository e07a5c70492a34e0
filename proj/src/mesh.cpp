#include "hybridmg/mesh.hpp"

#include "hybridmg/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace hybridmg {

namespace {

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace

Mesh::Mesh(std::vector<Eigen::Vector2d> vertices, const std::vector<ElementInput>& elements)
    : vertices_(std::move(vertices)) {
    const int nv = num_vertices();
    std::map<std::vector<int>, int> seen;
    std::map<std::pair<int, int>, int> edge_of;
    elements_.reserve(elements.size());
    for (std::size_t id = 0; id < elements.size(); ++id) {
        const ElementInput& in = elements[id];
        const int n = hybridmg::num_vertices(in.shape);
        if (static_cast<int>(in.v.size()) != n)
            throw TopologyError("element " + std::to_string(id) + ": expected " + std::to_string(n) + " vertices");
        Element el;
        el.shape = in.shape;
        el.tag = in.tag;
        for (int i = 0; i < n; ++i) {
            if (in.v[i] < 0 || in.v[i] >= nv)
                throw TopologyError("element " + std::to_string(id) + ": vertex index out of range");
            el.v[i] = in.v[i];
        }
        double area = 0.0;
        for (int i = 0; i < n; ++i) area += cross(vertices_[el.v[i]], vertices_[el.v[(i + 1) % n]]);
        double scale = 0.0;
        for (int i = 0; i < n; ++i)
            scale = std::max(scale, (vertices_[el.v[i]] - vertices_[el.v[(i + 1) % n]]).squaredNorm());
        if (std::abs(area) <= 1e-14 * scale || scale == 0.0)
            throw TopologyError("element " + std::to_string(id) + " has zero area");
        if (area < 0) std::reverse(el.v.begin() + 1, el.v.begin() + n);

        std::vector<int> key(el.v.begin(), el.v.begin() + n);
        std::sort(key.begin(), key.end());
        if (auto [it, inserted] = seen.emplace(key, static_cast<int>(id)); !inserted)
            throw TopologyError("element " + std::to_string(id) + " duplicates element " + std::to_string(it->second));

        for (int e = 0; e < n; ++e) {
            const int a = el.v[e];
            const int b = el.v[(e + 1) % n];
            const auto k = std::minmax(a, b);
            auto it = edge_of.find({k.first, k.second});
            if (it == edge_of.end()) {
                Edge edge;
                edge.v = {a, b};
                edge.left = static_cast<int>(id);
                edge.left_local = e;
                el.edges[e] = num_edges();
                edge_of.emplace(std::pair{k.first, k.second}, num_edges());
                edges_.push_back(edge);
                continue;
            }
            Edge& edge = edges_[it->second];
            if (edge.right >= 0)
                throw TopologyError("edge (" + std::to_string(k.first) + "," + std::to_string(k.second) +
                                    ") has more than two incident elements");
            if (edge.v[0] == a)
                throw TopologyError("edge (" + std::to_string(k.first) + "," + std::to_string(k.second) +
                                    ") traversed in the same direction by two elements");
            edge.right = static_cast<int>(id);
            edge.right_local = e;
            el.edges[e] = it->second;
            el.flipped[e] = true;
        }
        elements_.push_back(el);
    }
}

int Mesh::num_boundary_edges() const {
    return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.boundary(); }));
}

ElementGeometry Mesh::geometry(int elem) const {
    const Element& el = elements_[elem];
    std::array<Eigen::Vector2d, 4> pts;
    const int n = el.num_vertices();
    for (int i = 0; i < n; ++i) pts[i] = vertices_[el.v[i]];
    return ElementGeometry(el.shape, std::span<const Eigen::Vector2d>(pts.data(), n));
}

Eigen::Vector2d Mesh::centroid(int elem) const {
    const Element& el = elements_[elem];
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (int i = 0; i < el.num_vertices(); ++i) c += vertices_[el.v[i]];
    return c / el.num_vertices();
}

Eigen::Vector2d Mesh::edge_point(int edge, double t) const {
    const Edge& e = edges_[edge];
    return (1.0 - t) * vertices_[e.v[0]] + t * vertices_[e.v[1]];
}

double Mesh::edge_length(int edge) const {
    const Edge& e = edges_[edge];
    return (vertices_[e.v[1]] - vertices_[e.v[0]]).norm();
}

std::vector<int> Mesh::neighbors(int elem) const {
    std::vector<int> out;
    const Element& el = elements_[elem];
    for (int e = 0; e < el.num_vertices(); ++e) {
        const Edge& edge = edges_[el.edges[e]];
        if (edge.boundary()) continue;
        out.push_back(edge.left == elem ? edge.right : edge.left);
    }
    return out;
}

int Mesh::locate(const Eigen::Vector2d& p, double tol) const {
    for (int id = 0; id < num_elements(); ++id) {
        const Element& el = elements_[id];
        const int n = el.num_vertices();
        bool inside = true;
        for (int i = 0; i < n && inside; ++i) {
            const Eigen::Vector2d& a = vertices_[el.v[i]];
            const Eigen::Vector2d& b = vertices_[el.v[(i + 1) % n]];
            inside = cross(b - a, p - a) >= -tol * (b - a).norm();
        }
        if (inside) return id;
    }
    return -1;
}

// ---------------------------------------------------------------------------
// Generators

Mesh build_structured_quad_mesh(int n) {
    if (n < 1) throw ConfigError("structured mesh needs n >= 1");
    std::vector<Eigen::Vector2d> verts;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) verts.emplace_back(double(i) / n, double(j) / n);
    auto vid = [n](int i, int j) { return i + (n + 1) * j; };
    std::vector<ElementInput> elems;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            elems.push_back({Shape::Quad, {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)}, {}});
    return Mesh(std::move(verts), elems);
}

Mesh build_structured_tri_mesh(int n) {
    if (n < 1) throw ConfigError("structured mesh needs n >= 1");
    std::vector<Eigen::Vector2d> verts;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) verts.emplace_back(double(i) / n, double(j) / n);
    auto vid = [n](int i, int j) { return i + (n + 1) * j; };
    std::vector<ElementInput> elems;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            elems.push_back({Shape::Triangle, {vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)}, {}});
            elems.push_back({Shape::Triangle, {vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)}, {}});
        }
    return Mesh(std::move(verts), elems);
}

Mesh build_disk_mesh(const std::vector<int>& ring_counts) {
    if (ring_counts.empty()) throw ConfigError("disk mesh needs at least one ring");
    const int rings = static_cast<int>(ring_counts.size());
    std::vector<Eigen::Vector2d> verts{{0.0, 0.0}};
    std::vector<int> start;
    for (int r = 0; r < rings; ++r) {
        if (ring_counts[r] < 3) throw ConfigError("disk mesh rings need at least 3 vertices");
        start.push_back(static_cast<int>(verts.size()));
        const double radius = double(r + 1) / rings;
        for (int i = 0; i < ring_counts[r]; ++i) {
            const double a = 2.0 * std::numbers::pi * i / ring_counts[r];
            verts.emplace_back(radius * std::cos(a), radius * std::sin(a));
        }
    }
    std::vector<ElementInput> elems;
    for (int i = 0; i < ring_counts[0]; ++i)
        elems.push_back({Shape::Triangle, {0, start[0] + i, start[0] + (i + 1) % ring_counts[0]}, {}});
    for (int r = 0; r + 1 < rings; ++r) {
        const int na = ring_counts[r];
        const int nb = ring_counts[r + 1];
        auto a = [&](int i) { return start[r] + i % na; };
        auto b = [&](int j) { return start[r + 1] + j % nb; };
        int i = 0, j = 0;
        while (i < na || j < nb) {
            const double ta = double(i + 1) / na;
            const double tb = double(j + 1) / nb;
            if (i < na && (j >= nb || ta < tb)) {
                elems.push_back({Shape::Triangle, {a(i), b(j), a(i + 1)}, {}});
                ++i;
            } else {
                elems.push_back({Shape::Triangle, {a(i), b(j), b(j + 1)}, {}});
                ++j;
            }
        }
    }
    return Mesh(std::move(verts), elems);
}

Mesh build_box_with_holes(int n) {
    if (n < 8 || n % 8 != 0) throw ConfigError("box-with-holes mesh needs n divisible by 8");
    const int m = n / 8;
    auto in_hole = [m](int i, int j) {
        const int bx = i / m, by = j / m;
        const bool col = bx == 1 || bx == 3 || bx == 5;
        const bool row = by == 1 || by == 3 || by == 5;
        return col && row && !(bx == 3 && by == 3);
    };
    std::vector<int> id((n + 1) * (n + 1), -1);
    std::vector<Eigen::Vector2d> verts;
    auto vid = [&](int i, int j) {
        int& v = id[i + (n + 1) * j];
        if (v < 0) {
            v = static_cast<int>(verts.size());
            verts.emplace_back(double(i) / n, double(j) / n);
        }
        return v;
    };
    std::vector<ElementInput> elems;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            if (in_hole(i, j)) continue;
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            elems.push_back({Shape::Triangle, {a, b, c}, {}});
            elems.push_back({Shape::Triangle, {a, c, d}, {}});
        }
    return Mesh(std::move(verts), elems);
}

// ---------------------------------------------------------------------------
// Text format

Mesh parse_mesh(std::istream& in) {
    std::string raw;
    int lineno = 0;
    auto next_line = [&](std::istringstream& ss, const char* what) {
        while (std::getline(in, raw)) {
            ++lineno;
            if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
            ss.clear();
            ss.str(raw);
            return;
        }
        throw ParseError(lineno + 1, std::string("unexpected end of file, expected ") + what);
    };
    auto trailing = [](std::istringstream& ss) {
        std::string extra;
        return static_cast<bool>(ss >> extra);
    };

    std::istringstream ss;
    next_line(ss, "header");
    long nv = 0, ne = 0;
    if (!(ss >> nv >> ne) || trailing(ss) || nv < 0 || ne < 0)
        throw ParseError(lineno, "header must be 'nv ne' with non-negative integers");

    std::vector<Eigen::Vector2d> verts;
    verts.reserve(nv);
    for (long i = 0; i < nv; ++i) {
        next_line(ss, "vertex");
        double x, y;
        if (!(ss >> x >> y) || trailing(ss)) throw ParseError(lineno, "vertex line must be 'x y'");
        verts.emplace_back(x, y);
    }
    std::vector<ElementInput> elems;
    for (long i = 0; i < ne; ++i) {
        next_line(ss, "element");
        int shape;
        if (!(ss >> shape) || (shape != 3 && shape != 4)) throw ParseError(lineno, "element shape must be 3 or 4");
        ElementInput el;
        el.shape = shape == 3 ? Shape::Triangle : Shape::Quad;
        for (int k = 0; k < shape; ++k) {
            long v;
            if (!(ss >> v)) throw ParseError(lineno, "element needs " + std::to_string(shape) + " vertex indices");
            if (v < 0 || v >= nv) throw ParseError(lineno, "vertex index " + std::to_string(v) + " out of range");
            el.v.push_back(static_cast<int>(v));
        }
        std::string tag;
        if (ss >> tag) el.tag = tag;
        if (trailing(ss)) throw ParseError(lineno, "unexpected tokens after element tag");
        elems.push_back(std::move(el));
    }
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        if (raw.find_first_not_of(" \t\r") != std::string::npos) throw ParseError(lineno, "unexpected trailing data");
    }
    return Mesh(std::move(verts), elems);
}

Mesh import_tri_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open mesh file '" + path + "'");
    return parse_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
    out << mesh.num_vertices() << ' ' << mesh.num_elements() << '\n';
    out.precision(17);
    for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << '\n';
    for (const auto& el : mesh.elements()) {
        out << el.num_vertices();
        for (int i = 0; i < el.num_vertices(); ++i) out << ' ' << el.v[i];
        if (!el.tag.empty()) out << ' ' << el.tag;
        out << '\n';
    }
}

} // namespace hybridmg
