#pragma once

#include "hybridmg/mesh.hpp"

#include <vector>

namespace hybridmg {

enum class EdgeClass { Interior, MacroBoundary, DomainBoundary };

/// Connected chain of fine edges separating the same ordered pair of macros
/// (macro_b = -1 on the domain boundary).
struct MacroEdge {
    int macro_a = -1;
    int macro_b = -1;
    std::vector<int> fine_edges;  // in chain order
    std::vector<bool> reversed;   // fine edge traversed against its own orientation
    std::vector<int> vertices;    // chain vertices, fine_edges.size() + 1 entries
    std::vector<double> params;   // normalized chordal arclength at each chain vertex
    bool closed = false;

    bool on_domain_boundary() const { return macro_b < 0; }

    /// Parameter of the start (t = 0) and end (t = 1) of the i-th fine edge in
    /// its own orientation.
    double param_at_edge_start(int i) const { return reversed[i] ? params[i + 1] : params[i]; }
    double param_at_edge_end(int i) const { return reversed[i] ? params[i] : params[i + 1]; }
};

struct AgglomerationLevel {
    int num_macros = 0;
    std::vector<int> macro_of_element;
    std::vector<EdgeClass> edge_class;   // per fine edge
    std::vector<MacroEdge> macro_edges;  // ordered by smallest fine edge id
    std::vector<int> macro_edge_of_edge; // per fine edge, -1 when Interior
    std::vector<int> position_in_macro_edge;

    std::vector<int> macro_sizes() const;
};

/// Levels 1..N with level N the fine mesh.
struct AgglomerationHierarchy {
    std::vector<AgglomerationLevel> levels;

    int num_levels() const { return static_cast<int>(levels.size()); }
    const AgglomerationLevel& level(int k) const { return levels.at(k - 1); }
    AgglomerationLevel& level(int k) { return levels.at(k - 1); }
};

/// Quadtree blocks over the bounding box: level k has 2^k x 2^k macros (k < N).
AgglomerationHierarchy build_structured_hierarchy(const Mesh& mesh, int levels);

/// Level 1 grown from seeds by graph distance, finer levels by coordinate bisection.
AgglomerationHierarchy build_seeded_hierarchy(const Mesh& mesh, int levels,
                                              const std::vector<Eigen::Vector2d>& seeds);

/// Builds a hierarchy from explicit memberships (index 0 = level 1); the last
/// level must be the identity. Validates nesting and fills edge data.
AgglomerationHierarchy hierarchy_from_memberships(const Mesh& mesh, std::vector<std::vector<int>> memberships);

/// Fills edge classes and macro-edge chains of every level.
void classify_and_parameterize(const Mesh& mesh, AgglomerationHierarchy& hierarchy);

} // namespace hybridmg
