#ifndef LOCALCLT_DEPGRAPH_HPP
#define LOCALCLT_DEPGRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iosfwd>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "localclt/errors.hpp"

namespace localclt {

// Vertex identifier: a single integer for plain graphs, a d-tuple for lattice
// vertices, an m-tuple for U-statistic index vertices. Ordering is
// lexicographic, which fixes the enumeration order everywhere.
using VertexId = std::vector<long long>;

inline std::string format_vertex(const VertexId& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

inline VertexId parse_vertex(const std::string& token) {
    VertexId v;
    std::size_t pos = 0;
    while (pos <= token.size()) {
        std::size_t comma = token.find(',', pos);
        if (comma == std::string::npos) comma = token.size();
        const std::string part = token.substr(pos, comma - pos);
        if (part.empty()) throw ConfigError("bad vertex token '" + token + "'");
        char* end = nullptr;
        long long x = std::strtoll(part.c_str(), &end, 10);
        if (end == nullptr || *end != '\0')
            throw ConfigError("bad vertex token '" + token + "'");
        v.push_back(x);
        pos = comma + 1;
        if (comma == token.size()) break;
    }
    return v;
}

// Undirected dependency graph. Neighborhoods are the graph-closed ones:
// N(J) = J united with every vertex adjacent to J. Immutable once built.
class DependencyGraph {
public:
    DependencyGraph() = default;

    // edges may repeat or appear in both directions; vertices lists extra
    // (possibly isolated) vertices to retain.
    static DependencyGraph from_edge_list(const std::vector<std::pair<VertexId, VertexId>>& edges,
                                          const std::vector<VertexId>& vertices = {}) {
        std::set<VertexId> vs(vertices.begin(), vertices.end());
        for (const auto& e : edges) {
            vs.insert(e.first);
            vs.insert(e.second);
        }
        DependencyGraph g;
        g.verts_.assign(vs.begin(), vs.end());
        g.adj_.assign(g.verts_.size(), {});
        for (const auto& e : edges) {
            int a = g.index_of(e.first);
            int b = g.index_of(e.second);
            if (a == b) continue;  // self-loops are not stored
            g.adj_[static_cast<std::size_t>(a)].push_back(b);
            g.adj_[static_cast<std::size_t>(b)].push_back(a);
        }
        g.dedup_adjacency();
        return g;
    }

    // Edge between distinct lattice points iff max-norm distance <= m.
    static DependencyGraph m_dependent_lattice(const std::vector<VertexId>& points, int m) {
        if (points.empty()) throw ConfigError("m_dependent_lattice: empty point set");
        if (m < 0) throw ConfigError("m_dependent_lattice: m must be >= 0");
        std::set<VertexId> vs(points.begin(), points.end());
        DependencyGraph g;
        g.verts_.assign(vs.begin(), vs.end());
        g.adj_.assign(g.verts_.size(), {});
        const std::size_t n = g.verts_.size();
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (max_norm_leq(g.verts_[a], g.verts_[b], m)) {
                    g.adj_[a].push_back(static_cast<int>(b));
                    g.adj_[b].push_back(static_cast<int>(a));
                }
            }
        }
        g.dedup_adjacency();
        return g;
    }

    // Axis-aligned box {1..dims[0]} x ... x {1..dims[d-1]}.
    static DependencyGraph m_dependent_box(const std::vector<int>& dims, int m) {
        std::vector<VertexId> pts;
        VertexId cur(dims.size(), 1);
        for (;;) {
            pts.push_back(cur);
            std::size_t d = 0;
            for (; d < dims.size(); ++d) {
                if (cur[d] < dims[d]) {
                    ++cur[d];
                    break;
                }
                cur[d] = 1;
            }
            if (d == dims.size()) break;
        }
        return m_dependent_lattice(pts, m);
    }

    // Vertices are nondecreasing m-tuples over {1..n}; edge iff the tuples
    // share a coordinate value.
    static DependencyGraph u_stat_graph(int n, int m) {
        if (m < 2 || m > n) throw ConfigError("u_stat_graph: need 2 <= m <= n");
        std::vector<VertexId> tuples;
        VertexId cur(static_cast<std::size_t>(m), 1);
        for (;;) {
            tuples.push_back(cur);
            int d = m - 1;
            for (; d >= 0; --d) {
                if (cur[static_cast<std::size_t>(d)] < n) {
                    ++cur[static_cast<std::size_t>(d)];
                    for (int e = d + 1; e < m; ++e)
                        cur[static_cast<std::size_t>(e)] = cur[static_cast<std::size_t>(d)];
                    break;
                }
            }
            if (d < 0) break;
        }
        std::sort(tuples.begin(), tuples.end());
        DependencyGraph g;
        g.verts_ = std::move(tuples);
        g.adj_.assign(g.verts_.size(), {});
        const std::size_t nv = g.verts_.size();
        for (std::size_t a = 0; a < nv; ++a) {
            for (std::size_t b = a + 1; b < nv; ++b) {
                if (tuples_intersect(g.verts_[a], g.verts_[b])) {
                    g.adj_[a].push_back(static_cast<int>(b));
                    g.adj_[b].push_back(static_cast<int>(a));
                }
            }
        }
        g.dedup_adjacency();
        return g;
    }

    int size() const { return static_cast<int>(verts_.size()); }
    const VertexId& vertex(int idx) const { return verts_[static_cast<std::size_t>(idx)]; }
    const std::vector<VertexId>& vertices() const { return verts_; }
    const std::vector<int>& adjacency(int idx) const { return adj_[static_cast<std::size_t>(idx)]; }

    int index_of(const VertexId& v) const {
        auto it = std::lower_bound(verts_.begin(), verts_.end(), v);
        if (it == verts_.end() || *it != v)
            throw ConfigError("vertex " + format_vertex(v) + " not in graph");
        return static_cast<int>(it - verts_.begin());
    }

    bool contains(const VertexId& v) const {
        auto it = std::lower_bound(verts_.begin(), verts_.end(), v);
        return it != verts_.end() && *it == v;
    }

    // Closed neighborhood of an index set, sorted. J must be non-empty.
    std::vector<int> neighborhood_idx(const std::vector<int>& J) const {
        if (J.empty()) throw ConfigError("neighborhood of empty query set");
        std::set<int> out(J.begin(), J.end());
        for (int j : J) {
            check_idx(j);
            out.insert(adj_[static_cast<std::size_t>(j)].begin(),
                       adj_[static_cast<std::size_t>(j)].end());
        }
        return {out.begin(), out.end()};
    }

    std::vector<VertexId> neighborhood(const std::vector<VertexId>& J) const {
        std::vector<int> idx;
        idx.reserve(J.size());
        for (const auto& v : J) idx.push_back(index_of(v));
        std::vector<VertexId> out;
        for (int i : neighborhood_idx(idx)) out.push_back(vertex(i));
        return out;
    }

    int max_degree() const {
        std::size_t d = 0;
        for (const auto& a : adj_) d = std::max(d, a.size());
        return static_cast<int>(d);
    }

    struct NeighborhoodSizeBound {
        int value = 0;
        bool exact = true;  // false means the (q+1)*(max degree + 1) shortcut
    };

    enum class SizeBoundMode { Auto, Exact, Shortcut };

    // M for remainder order q: the maximum of |N(i_{1:q+1})| over chains
    // i1 in I, i2 in N(i1), ..., i_{q+1} in N(i_{1:q}). These are the inner
    // index sets of R_{q,w}, and with q = ceil(p) the M hypothesis of the
    // local-wp2 bound. Exact enumeration, or a conservative
    // (q+1) * (max_i deg(i) + 1) shortcut when the chain count is too large.
    NeighborhoodSizeBound max_neighborhood_size(int q, SizeBoundMode mode = SizeBoundMode::Auto,
                                                std::uint64_t node_budget = 20'000'000) const {
        if (q < 1) throw ConfigError("max_neighborhood_size: q must be >= 1");
        const int maxdeg = max_degree();
        NeighborhoodSizeBound shortcut{(q + 1) * (maxdeg + 1), false};
        if (mode == SizeBoundMode::Shortcut) return shortcut;
        if (mode == SizeBoundMode::Auto) {
            double est = static_cast<double>(size());
            for (int lvl = 1; lvl <= q; ++lvl) est *= static_cast<double>(lvl) * (maxdeg + 1);
            if (est > static_cast<double>(node_budget)) return shortcut;
        }
        NeighborhoodSizeBound out{0, true};
        std::vector<int> chain;
        std::uint64_t visited = 0;
        for (int i = 0; i < size(); ++i) {
            chain.assign(1, i);
            chase(chain, q + 1, visited, node_budget, mode, out);
        }
        return out;
    }

    // ---- edge-list text format ----
    // One edge per line: two whitespace-separated vertex tokens. An optional
    // header line "vertices: v1 v2 ..." declares isolated vertices. Lattice
    // vertices use comma-joined coordinates.
    static DependencyGraph parse_edge_list(std::istream& in);
    std::string to_edge_list() const {
        std::string s = "vertices:";
        for (const auto& v : verts_) s += " " + format_vertex(v);
        s += '\n';
        for (int a = 0; a < size(); ++a)
            for (int b : adjacency(a))
                if (a < b) s += format_vertex(vertex(a)) + " " + format_vertex(vertex(b)) + "\n";
        return s;
    }

private:
    void check_idx(int i) const {
        if (i < 0 || i >= size()) throw ConfigError("vertex index out of range");
    }

    void dedup_adjacency() {
        for (auto& a : adj_) {
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
        }
    }

    static bool max_norm_leq(const VertexId& a, const VertexId& b, int m) {
        if (a.size() != b.size())
            throw ConfigError("lattice points of mixed dimension");
        for (std::size_t d = 0; d < a.size(); ++d) {
            long long diff = a[d] > b[d] ? a[d] - b[d] : b[d] - a[d];
            if (diff > m) return false;
        }
        return true;
    }

    static bool tuples_intersect(const VertexId& a, const VertexId& b) {
        // both sorted nondecreasing
        std::size_t i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            if (a[i] == b[j]) return true;
            if (a[i] < b[j])
                ++i;
            else
                ++j;
        }
        return false;
    }

    void chase(std::vector<int>& chain, int q, std::uint64_t& visited,
               std::uint64_t node_budget, SizeBoundMode mode,
               NeighborhoodSizeBound& out) const {
        if (++visited > node_budget && mode == SizeBoundMode::Exact)
            throw NumericError("max_neighborhood_size: exact enumeration budget exceeded");
        std::vector<int> nb = neighborhood_idx(chain);
        if (static_cast<int>(chain.size()) == q) {
            out.value = std::max(out.value, static_cast<int>(nb.size()));
            return;
        }
        for (int next : nb) {
            chain.push_back(next);
            chase(chain, q, visited, node_budget, mode, out);
            chain.pop_back();
        }
    }

    std::vector<VertexId> verts_;       // sorted lexicographically
    std::vector<std::vector<int>> adj_; // sorted index lists, symmetric, no self
};

inline DependencyGraph DependencyGraph::parse_edge_list(std::istream& in) {
    std::vector<std::pair<VertexId, VertexId>> edges;
    std::vector<VertexId> declared;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;  // blank line
        if (tok == "vertices:") {
            while (ls >> tok) declared.push_back(parse_vertex(tok));
            continue;
        }
        std::string tok2;
        if (!(ls >> tok2))
            throw ConfigError("edge list line " + std::to_string(lineno) + ": expected two vertices");
        std::string extra;
        if (ls >> extra)
            throw ConfigError("edge list line " + std::to_string(lineno) + ": trailing token '" + extra + "'");
        edges.emplace_back(parse_vertex(tok), parse_vertex(tok2));
    }
    return from_edge_list(edges, declared);
}

}  // namespace localclt

#endif
