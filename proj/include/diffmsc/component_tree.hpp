#pragma once

#include <diffmsc/error.hpp>
#include <diffmsc/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

namespace diffmsc {

/// Union-find with union by rank and path halving.
template <class Index = std::size_t>
class DisjointSets {
public:
    explicit DisjointSets(Index n) : parent_(n), rank_(n, 0)
    {
        std::iota(parent_.begin(), parent_.end(), Index{0});
    }

    Index find(Index x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Links two roots and returns the surviving root.
    Index link(Index a, Index b)
    {
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
        return a;
    }

private:
    std::vector<Index> parent_;
    std::vector<unsigned char> rank_;
};

enum class GraphWeighting { Vertex, Edge };

/// Graph with exactly one non-negative weight field and per-vertex area elements.
struct WeightedGraph {
    GraphWeighting weighting = GraphWeighting::Vertex;
    std::size_t vertex_count = 0;
    std::vector<Edge> edges;          ///< unique pairs with first < second
    std::vector<double> weights;      ///< one per vertex or one per edge
    std::vector<double> areas;        ///< one per vertex; empty means unit areas

    static WeightedGraph vertex_weighted(std::size_t n, std::vector<Edge> edges,
                                         std::vector<double> weights,
                                         std::vector<double> areas = {})
    {
        WeightedGraph g{GraphWeighting::Vertex, n, std::move(edges), std::move(weights), std::move(areas)};
        g.validate();
        return g;
    }

    static WeightedGraph edge_weighted(std::size_t n, std::vector<Edge> edges,
                                       std::vector<double> weights,
                                       std::vector<double> areas = {})
    {
        WeightedGraph g{GraphWeighting::Edge, n, std::move(edges), std::move(weights), std::move(areas)};
        g.validate();
        return g;
    }

    double area(std::size_t v) const { return areas.empty() ? 1.0 : areas[v]; }

    void validate() const
    {
        const std::size_t expected = weighting == GraphWeighting::Vertex ? vertex_count : edges.size();
        if (weights.size() != expected) {
            throw InvalidInput("expected " + std::to_string(expected) + " weights, got " +
                               std::to_string(weights.size()));
        }
        if (!areas.empty() && areas.size() != vertex_count) {
            throw InvalidInput("area count does not match vertex count");
        }
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
                throw InvalidInput("weight " + std::to_string(i) + " is negative or not finite");
            }
        }
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const Edge& e = edges[i];
            if (e[0] >= e[1] || e[1] >= vertex_count) {
                throw InvalidInput("edge " + std::to_string(i) + " is not an ordered in-range pair");
            }
            if (i > 0 && !(edges[i - 1] < e)) {
                std::vector<Edge> sorted = edges;
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                    throw InvalidInput("edge list contains duplicates");
                }
                break;
            }
        }
    }
};

struct ComponentNode {
    double altitude = 0.0;
    double area = 0.0;
    std::size_t size = 0;       ///< number of member vertices
    std::size_t parent = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> children;      ///< ascending node ids
    std::vector<std::size_t> own_vertices;  ///< vertices that first appear in this node
    std::size_t min_vertex = 0;
};

/// Component tree (a forest for disconnected graphs). Nodes are stored in creation order:
/// ascending altitude, ties broken by smallest member vertex. Member sets are rebuilt on
/// demand from `own_vertices` of the subtree.
class ComponentTree {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    const ComponentNode& operator[](std::size_t id) const { return nodes_[id]; }
    const std::vector<ComponentNode>& nodes() const { return nodes_; }

    std::vector<std::size_t> roots() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i].parent == npos) out.push_back(i);
        }
        return out;
    }

    /// Sorted member vertices of a node.
    std::vector<std::size_t> members(std::size_t id) const
    {
        std::vector<std::size_t> out;
        out.reserve(nodes_[id].size);
        std::vector<std::size_t> stack{id};
        while (!stack.empty()) {
            const std::size_t n = stack.back();
            stack.pop_back();
            out.insert(out.end(), nodes_[n].own_vertices.begin(), nodes_[n].own_vertices.end());
            stack.insert(stack.end(), nodes_[n].children.begin(), nodes_[n].children.end());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    bool is_ancestor(std::size_t ancestor, std::size_t node) const
    {
        for (std::size_t n = nodes_[node].parent; n != npos; n = nodes_[n].parent) {
            if (n == ancestor) return true;
        }
        return false;
    }

    /// Total area of vertices covered by the tree.
    double covered_area() const
    {
        double sum = 0.0;
        for (std::size_t r : roots()) sum += nodes_[r].area;
        return sum;
    }

    /// One node per line: id parent altitude area size (parent -1 for roots).
    void dump(std::ostream& out) const
    {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const auto& n = nodes_[i];
            out << i << ' ' << (n.parent == npos ? std::string("-1") : std::to_string(n.parent)) << ' '
                << detail::format_double(n.altitude) << ' ' << detail::format_double(n.area) << ' '
                << n.size << '\n';
        }
    }

private:
    friend ComponentTree build_tree(const WeightedGraph& g);
    std::vector<ComponentNode> nodes_;
};

/// Builds the component tree level by level with union-find. At each distinct weight
/// value, every set whose membership changed becomes a new node whose children are the
/// nodes of the sets it absorbed. Vertex-weighted graphs admit each vertex as a singleton
/// at its own weight; edge-weighted graphs admit a vertex with its lightest incident edge.
inline ComponentTree build_tree(const WeightedGraph& g)
{
    g.validate();
    ComponentTree tree;
    const std::size_t n = g.vertex_count;
    if (n == 0) return tree;

    const bool by_vertex = g.weighting == GraphWeighting::Vertex;
    std::vector<std::size_t> order(g.weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return g.weights[a] < g.weights[b] || (g.weights[a] == g.weights[b] && a < b);
    });

    std::vector<std::vector<std::size_t>> neighbors;
    if (by_vertex) {
        neighbors.resize(n);
        for (const Edge& e : g.edges) {
            neighbors[e[0]].push_back(e[1]);
            neighbors[e[1]].push_back(e[0]);
        }
    }

    DisjointSets<std::size_t> sets(n);
    std::vector<char> active(n, 0), changed(n, 0);
    std::vector<std::size_t> node_of(n, ComponentTree::npos), min_vertex(n);
    std::vector<std::vector<std::size_t>> pending_children(n), pending_own(n);
    std::vector<std::size_t> touched;
    auto& nodes = tree.nodes_;

    auto activate = [&](std::size_t v) {
        active[v] = 1;
        changed[v] = 1;
        pending_own[v] = {v};
        min_vertex[v] = v;
        touched.push_back(v);
    };
    auto mark_changed = [&](std::size_t root) {
        if (changed[root]) return;
        changed[root] = 1;
        pending_children[root] = {node_of[root]};
        touched.push_back(root);
    };
    auto unite = [&](std::size_t a, std::size_t b) {
        std::size_t ra = sets.find(a), rb = sets.find(b);
        if (ra == rb) return;
        mark_changed(ra);
        mark_changed(rb);
        const std::size_t r = sets.link(ra, rb);
        const std::size_t other = r == ra ? rb : ra;
        auto& kids = pending_children[r];
        kids.insert(kids.end(), pending_children[other].begin(), pending_children[other].end());
        auto& own = pending_own[r];
        own.insert(own.end(), pending_own[other].begin(), pending_own[other].end());
        pending_children[other].clear();
        pending_own[other].clear();
        min_vertex[r] = std::min(min_vertex[ra], min_vertex[rb]);
    };

    std::size_t pos = 0;
    while (pos < order.size()) {
        const double level = g.weights[order[pos]];
        std::size_t end = pos;
        while (end < order.size() && g.weights[order[end]] == level) ++end;

        touched.clear();
        if (by_vertex) {
            for (std::size_t i = pos; i < end; ++i) activate(order[i]);
            for (std::size_t i = pos; i < end; ++i) {
                const std::size_t v = order[i];
                for (std::size_t u : neighbors[v]) {
                    if (active[u]) unite(v, u);
                }
            }
        } else {
            for (std::size_t i = pos; i < end; ++i) {
                const Edge& e = g.edges[order[i]];
                if (!active[e[0]]) activate(e[0]);
                if (!active[e[1]]) activate(e[1]);
                unite(e[0], e[1]);
            }
        }

        std::vector<std::size_t> fresh;
        for (std::size_t r : touched) {
            if (sets.find(r) == r && changed[r]) {
                fresh.push_back(r);
                changed[r] = 0;
            }
        }
        std::sort(fresh.begin(), fresh.end(),
                  [&](std::size_t a, std::size_t b) { return min_vertex[a] < min_vertex[b]; });
        for (std::size_t r : fresh) {
            ComponentNode node;
            node.altitude = level;
            node.children = std::move(pending_children[r]);
            node.own_vertices = std::move(pending_own[r]);
            std::sort(node.children.begin(), node.children.end());
            std::sort(node.own_vertices.begin(), node.own_vertices.end());
            node.min_vertex = min_vertex[r];
            for (std::size_t v : node.own_vertices) node.area += g.area(v);
            node.size = node.own_vertices.size();
            const std::size_t id = nodes.size();
            for (std::size_t c : node.children) {
                node.area += nodes[c].area;
                node.size += nodes[c].size;
                nodes[c].parent = id;
            }
            pending_children[r].clear();
            pending_own[r].clear();
            node_of[r] = id;
            nodes.push_back(std::move(node));
        }
        pos = end;
    }
    return tree;
}

} // namespace diffmsc
