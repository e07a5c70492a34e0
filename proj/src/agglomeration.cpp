#include "hybridmg/agglomeration.hpp"

#include "hybridmg/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

namespace hybridmg {

namespace {

std::vector<int> compress_ids(const std::vector<int>& ids) {
    std::map<int, int> fresh;
    std::vector<int> out(ids.size());
    for (int id : ids) fresh.emplace(id, 0);
    int next = 0;
    for (auto& [id, value] : fresh) value = next++;
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = fresh[ids[i]];
    return out;
}

int count_macros(const std::vector<int>& membership) {
    return membership.empty() ? 0 : *std::max_element(membership.begin(), membership.end()) + 1;
}

// Edge-connected components of `elems`, which all have owner == part.
std::vector<std::vector<int>> components(const Mesh& mesh, const std::vector<int>& elems,
                                         const std::vector<int>& owner, int part) {
    std::vector<std::vector<int>> out;
    std::map<int, bool> seen;
    for (int e : elems) seen[e] = false;
    for (int e : elems) {
        if (seen[e]) continue;
        std::vector<int> comp;
        std::deque<int> queue{e};
        seen[e] = true;
        while (!queue.empty()) {
            const int cur = queue.front();
            queue.pop_front();
            comp.push_back(cur);
            for (int nb : mesh.neighbors(cur)) {
                if (owner[nb] != part || seen[nb]) continue;
                seen[nb] = true;
                queue.push_back(nb);
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

std::pair<std::vector<int>, std::vector<int>> bisect(const Mesh& mesh, std::vector<int> elems) {
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector2d hi = -lo;
    for (int e : elems) {
        const Eigen::Vector2d c = mesh.centroid(e);
        lo = lo.cwiseMin(c);
        hi = hi.cwiseMax(c);
    }
    const int axis = (hi.y() - lo.y()) > (hi.x() - lo.x()) ? 1 : 0;
    std::sort(elems.begin(), elems.end(), [&](int a, int b) {
        const double ca = mesh.centroid(a)[axis];
        const double cb = mesh.centroid(b)[axis];
        return ca != cb ? ca < cb : a < b;
    });
    const std::size_t half = (elems.size() + 1) / 2;
    return {std::vector<int>(elems.begin(), elems.begin() + half), std::vector<int>(elems.begin() + half, elems.end())};
}

// Splits one connected macro into at most four edge-connected parts.
std::vector<std::vector<int>> split_macro(const Mesh& mesh, const std::vector<int>& elems) {
    std::vector<std::vector<int>> parts;
    if (elems.size() < 2) return {elems};
    auto [a, b] = bisect(mesh, elems);
    for (auto* half : {&a, &b}) {
        if (half->size() < 2) {
            parts.push_back(*half);
            continue;
        }
        auto [c, d] = bisect(mesh, *half);
        parts.push_back(std::move(c));
        if (!d.empty()) parts.push_back(std::move(d));
    }

    // Connectivity repair: orphaned pieces join the neighbouring part they touch most.
    std::vector<int> owner(mesh.num_elements(), -1);
    for (std::size_t p = 0; p < parts.size(); ++p)
        for (int e : parts[p]) owner[e] = static_cast<int>(p);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t p = 0; p < parts.size() && !changed; ++p) {
            auto comps = components(mesh, parts[p], owner, static_cast<int>(p));
            if (comps.size() < 2) continue;
            std::size_t keep = 0;
            for (std::size_t c = 1; c < comps.size(); ++c)
                if (comps[c].size() > comps[keep].size()) keep = c;
            for (std::size_t c = 0; c < comps.size(); ++c) {
                if (c == keep) continue;
                std::map<int, int> touching;
                for (int e : comps[c])
                    for (int nb : mesh.neighbors(e))
                        if (owner[nb] >= 0 && owner[nb] != static_cast<int>(p)) ++touching[owner[nb]];
                if (touching.empty()) throw TopologyError("seeded hierarchy: macro is not edge-connected");
                int target = touching.begin()->first;
                for (auto [q, count] : touching)
                    if (count > touching[target]) target = q;
                for (int e : comps[c]) owner[e] = target;
            }
            changed = true;
            for (auto& part : parts) part.clear();
            for (int e : elems) parts[owner[e]].push_back(e);
        }
    }
    parts.erase(std::remove_if(parts.begin(), parts.end(), [](const auto& v) { return v.empty(); }), parts.end());
    return parts;
}

// Builds the chains of one (macro_a, macro_b) group of fine edges.
void build_chains(const Mesh& mesh, int macro_a, int macro_b, const std::vector<int>& group,
                  std::vector<MacroEdge>& out) {
    std::map<int, std::vector<int>> at_vertex;
    for (int e : group)
        for (int v : mesh.edge(e).v) at_vertex[v].push_back(e);
    std::map<int, bool> used;
    for (int e : group) used[e] = false;

    auto other_end = [&](int e, int v) { return mesh.edge(e).v[0] == v ? mesh.edge(e).v[1] : mesh.edge(e).v[0]; };
    auto next_edge = [&](int v, int prev) {
        const auto& list = at_vertex[v];
        if (list.size() != 2) return -1;
        return list[0] == prev ? list[1] : list[0];
    };

    for (int seed : group) {
        if (used[seed]) continue;
        used[seed] = true;
        MacroEdge me;
        me.macro_a = macro_a;
        me.macro_b = macro_b;

        std::vector<std::pair<int, bool>> fwd; // (edge, reversed)
        int cur = mesh.edge(seed).v[1];
        int prev = seed;
        while (true) {
            const int nxt = next_edge(cur, prev);
            if (nxt < 0) break;
            if (nxt == seed) {
                me.closed = true;
                break;
            }
            if (used[nxt]) break;
            used[nxt] = true;
            fwd.push_back({nxt, mesh.edge(nxt).v[0] != cur});
            cur = other_end(nxt, cur);
            prev = nxt;
        }
        std::vector<std::pair<int, bool>> bwd;
        if (!me.closed) {
            cur = mesh.edge(seed).v[0];
            prev = seed;
            while (true) {
                const int nxt = next_edge(cur, prev);
                if (nxt < 0 || used[nxt]) break;
                used[nxt] = true;
                bwd.push_back({nxt, mesh.edge(nxt).v[1] != cur});
                cur = other_end(nxt, cur);
                prev = nxt;
            }
        }
        std::vector<std::pair<int, bool>> chain(bwd.rbegin(), bwd.rend());
        chain.push_back({seed, false});
        chain.insert(chain.end(), fwd.begin(), fwd.end());

        for (auto [e, rev] : chain) {
            me.fine_edges.push_back(e);
            me.reversed.push_back(rev);
        }
        const auto& first = mesh.edge(chain.front().first);
        me.vertices.push_back(chain.front().second ? first.v[1] : first.v[0]);
        for (auto [e, rev] : chain) me.vertices.push_back(rev ? mesh.edge(e).v[0] : mesh.edge(e).v[1]);

        std::vector<double> cum{0.0};
        for (std::size_t i = 0; i + 1 < me.vertices.size(); ++i)
            cum.push_back(cum.back() + (mesh.vertex(me.vertices[i + 1]) - mesh.vertex(me.vertices[i])).norm());
        for (double& c : cum) c /= cum.back();
        cum.back() = 1.0;
        me.params = std::move(cum);
        out.push_back(std::move(me));
    }
}

} // namespace

std::vector<int> AgglomerationLevel::macro_sizes() const {
    std::vector<int> sizes(num_macros, 0);
    for (int m : macro_of_element) ++sizes[m];
    return sizes;
}

void classify_and_parameterize(const Mesh& mesh, AgglomerationHierarchy& hierarchy) {
    for (auto& level : hierarchy.levels) {
        const int ne = mesh.num_edges();
        level.edge_class.assign(ne, EdgeClass::Interior);
        level.macro_edge_of_edge.assign(ne, -1);
        level.position_in_macro_edge.assign(ne, -1);
        level.macro_edges.clear();

        std::map<std::pair<int, int>, std::vector<int>> groups;
        for (int e = 0; e < ne; ++e) {
            const Edge& edge = mesh.edge(e);
            const int a = level.macro_of_element[edge.left];
            if (edge.boundary()) {
                level.edge_class[e] = EdgeClass::DomainBoundary;
                groups[{a, -1}].push_back(e);
                continue;
            }
            const int b = level.macro_of_element[edge.right];
            if (a == b) continue;
            level.edge_class[e] = EdgeClass::MacroBoundary;
            groups[{std::min(a, b), std::max(a, b)}].push_back(e);
        }
        for (const auto& [key, group] : groups) build_chains(mesh, key.first, key.second, group, level.macro_edges);
        std::sort(level.macro_edges.begin(), level.macro_edges.end(), [](const MacroEdge& x, const MacroEdge& y) {
            return *std::min_element(x.fine_edges.begin(), x.fine_edges.end()) <
                   *std::min_element(y.fine_edges.begin(), y.fine_edges.end());
        });
        for (std::size_t m = 0; m < level.macro_edges.size(); ++m) {
            const auto& me = level.macro_edges[m];
            for (std::size_t i = 0; i < me.fine_edges.size(); ++i) {
                level.macro_edge_of_edge[me.fine_edges[i]] = static_cast<int>(m);
                level.position_in_macro_edge[me.fine_edges[i]] = static_cast<int>(i);
            }
        }
    }
}

AgglomerationHierarchy hierarchy_from_memberships(const Mesh& mesh, std::vector<std::vector<int>> memberships) {
    if (memberships.empty()) throw TopologyError("hierarchy needs at least one level");
    const int ne = mesh.num_elements();
    AgglomerationHierarchy h;
    for (std::size_t k = 0; k < memberships.size(); ++k) {
        auto& m = memberships[k];
        if (static_cast<int>(m.size()) != ne) throw TopologyError("membership size does not match the mesh");
        AgglomerationLevel level;
        level.num_macros = count_macros(m);
        std::vector<int> sizes(level.num_macros, 0);
        for (int id : m) {
            if (id < 0) throw TopologyError("negative macro id");
            ++sizes[id];
        }
        for (int s : sizes)
            if (s == 0) throw TopologyError("level " + std::to_string(k + 1) + " has a macro with zero elements");
        level.macro_of_element = std::move(m);
        h.levels.push_back(std::move(level));
    }
    for (int e = 0; e < ne; ++e)
        if (h.levels.back().macro_of_element[e] != e)
            throw TopologyError("finest level must consist of the fine elements");
    for (int k = 1; k < h.num_levels(); ++k) {
        const auto& coarse = h.level(k);
        const auto& fine = h.level(k + 1);
        std::vector<int> parent(fine.num_macros, -1);
        for (int e = 0; e < ne; ++e) {
            int& p = parent[fine.macro_of_element[e]];
            if (p < 0) p = coarse.macro_of_element[e];
            if (p != coarse.macro_of_element[e])
                throw TopologyError("level " + std::to_string(k + 1) + " macros are not nested in level " +
                                    std::to_string(k));
        }
    }
    classify_and_parameterize(mesh, h);
    return h;
}

AgglomerationHierarchy build_structured_hierarchy(const Mesh& mesh, int levels) {
    if (levels < 1) throw ConfigError("hierarchy needs at least one level");
    const int ne = mesh.num_elements();
    if (ne == 0) throw TopologyError("empty mesh");

    // Elements per side of a structured quad or split-quad triangle mesh.
    int n = static_cast<int>(std::lround(std::sqrt(double(ne))));
    if (n * n != ne) n = static_cast<int>(std::lround(std::sqrt(ne / 2.0)));
    if ((n * n == ne || 2 * n * n == ne) && n % (1 << levels) != 0 && levels > 1)
        throw TopologyError("structured hierarchy: " + std::to_string(n) + " elements per side is not divisible by " +
                            std::to_string(1 << levels));

    Eigen::Vector2d lo = mesh.vertex(0), hi = mesh.vertex(0);
    for (const auto& v : mesh.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const Eigen::Vector2d ext = hi - lo;

    std::vector<std::vector<int>> memberships;
    for (int k = 1; k < levels; ++k) {
        const int cells = 1 << k;
        std::vector<int> m(ne);
        for (int e = 0; e < ne; ++e) {
            const Eigen::Vector2d c = (mesh.centroid(e) - lo).cwiseQuotient(ext) * cells;
            const int ix = std::clamp(static_cast<int>(std::floor(c.x())), 0, cells - 1);
            const int iy = std::clamp(static_cast<int>(std::floor(c.y())), 0, cells - 1);
            const Element& el = mesh.element(e);
            for (int i = 0; i < el.num_vertices(); ++i) {
                const Eigen::Vector2d p = (mesh.vertex(el.v[i]) - lo).cwiseQuotient(ext) * cells;
                if (p.x() < ix - 1e-9 || p.x() > ix + 1 + 1e-9 || p.y() < iy - 1e-9 || p.y() > iy + 1 + 1e-9)
                    throw TopologyError("structured hierarchy: element " + std::to_string(e) +
                                        " straddles a level-" + std::to_string(k) + " block");
            }
            m[e] = ix + cells * iy;
        }
        memberships.push_back(compress_ids(m));
    }
    std::vector<int> fine(ne);
    std::iota(fine.begin(), fine.end(), 0);
    memberships.push_back(fine);
    for (std::size_t k = 1; k < memberships.size(); ++k)
        if (count_macros(memberships[k]) <= count_macros(memberships[k - 1]))
            throw TopologyError("structured hierarchy: macro counts must increase with the level");
    return hierarchy_from_memberships(mesh, std::move(memberships));
}

AgglomerationHierarchy build_seeded_hierarchy(const Mesh& mesh, int levels, const std::vector<Eigen::Vector2d>& seeds) {
    if (levels < 2) throw ConfigError("seeded hierarchy needs at least two levels");
    if (seeds.empty()) throw ConfigError("seeded hierarchy needs at least one seed");
    const int ne = mesh.num_elements();

    std::vector<int> best_dist(ne, -1), level1(ne, -1);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const int start = mesh.locate(seeds[s]);
        if (start < 0)
            throw TopologyError("seed " + std::to_string(s) + " at (" + std::to_string(seeds[s].x()) + ", " +
                                std::to_string(seeds[s].y()) + ") lies outside the mesh");
        std::vector<int> dist(ne, -1);
        std::deque<int> queue{start};
        dist[start] = 0;
        while (!queue.empty()) {
            const int cur = queue.front();
            queue.pop_front();
            for (int nb : mesh.neighbors(cur))
                if (dist[nb] < 0) {
                    dist[nb] = dist[cur] + 1;
                    queue.push_back(nb);
                }
        }
        for (int e = 0; e < ne; ++e)
            if (dist[e] >= 0 && (best_dist[e] < 0 || dist[e] < best_dist[e])) {
                best_dist[e] = dist[e];
                level1[e] = static_cast<int>(s);
            }
    }
    for (int e = 0; e < ne; ++e)
        if (level1[e] < 0) throw TopologyError("element " + std::to_string(e) + " is not reachable from any seed");
    std::vector<int> sizes(seeds.size(), 0);
    for (int m : level1) ++sizes[m];
    for (std::size_t s = 0; s < seeds.size(); ++s)
        if (sizes[s] == 0) throw TopologyError("seed " + std::to_string(s) + " produced a macro with zero elements");

    std::vector<std::vector<int>> memberships{level1};
    for (int k = 2; k < levels; ++k) {
        const auto& parent = memberships.back();
        std::vector<std::vector<int>> macros(count_macros(parent));
        for (int e = 0; e < ne; ++e) macros[parent[e]].push_back(e);
        std::vector<int> m(ne, -1);
        int next = 0;
        for (const auto& macro : macros)
            for (const auto& part : split_macro(mesh, macro)) {
                for (int e : part) m[e] = next;
                ++next;
            }
        memberships.push_back(std::move(m));
    }
    std::vector<int> fine(ne);
    std::iota(fine.begin(), fine.end(), 0);
    memberships.push_back(fine);
    return hierarchy_from_memberships(mesh, std::move(memberships));
}

} // namespace hybridmg
