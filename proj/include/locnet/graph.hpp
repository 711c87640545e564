#pragma once

// In-degrees, strongly connected components and condensation for small dense
// directed graphs.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "locnet/matrix.hpp"

namespace locnet {

template <typename G>
concept DirectedGraph = requires(const G& g, std::size_t i) {
    { g.node_count() } -> std::convertible_to<std::size_t>;
    { g.has_edge(i, i) } -> std::convertible_to<bool>;
};

/// Plain adjacency-matrix digraph. entry (i, j) is the edge i -> j.
class Digraph {
public:
    Digraph() = default;
    explicit Digraph(std::size_t n) : adj_(n, n, 0) {}

    [[nodiscard]] std::size_t node_count() const noexcept { return adj_.rows(); }
    [[nodiscard]] bool has_edge(std::size_t i, std::size_t j) const noexcept { return adj_(i, j) != 0; }
    void add_edge(std::size_t i, std::size_t j) { adj_(i, j) = 1; }
    void remove_edge(std::size_t i, std::size_t j) { adj_(i, j) = 0; }

    [[nodiscard]] std::size_t edge_count() const noexcept {
        std::size_t n = 0;
        for (auto v : adj_.data()) n += v;
        return n;
    }

    friend bool operator==(const Digraph&, const Digraph&) = default;

private:
    Matrix<unsigned char> adj_;
};

template <DirectedGraph G>
std::vector<std::size_t> in_degrees(const G& g) {
    const std::size_t n = g.node_count();
    std::vector<std::size_t> z(n, 0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (g.has_edge(j, i)) ++z[i];
    return z;
}

template <DirectedGraph G>
std::size_t edge_count(const G& g) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        for (std::size_t j = 0; j < g.node_count(); ++j) n += g.has_edge(i, j) ? 1 : 0;
    return n;
}

struct SCCPartition {
    std::vector<std::vector<std::size_t>> components;  // each sorted; ordered by smallest member
    std::vector<std::size_t> component_of;

    [[nodiscard]] std::size_t size() const noexcept { return components.size(); }
    [[nodiscard]] bool is_singleton(std::size_t node) const {
        return components.at(component_of.at(node)).size() == 1;
    }
    friend bool operator==(const SCCPartition&, const SCCPartition&) = default;
};

/// Tarjan's low-link algorithm with an explicit DFS stack. Components are
/// returned in canonical order (sorted members, sorted by smallest member).
template <DirectedGraph G>
SCCPartition strongly_connected_components(const G& g) {
    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
    const std::size_t n = g.node_count();
    std::vector<std::size_t> index(n, unvisited), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> found;
    std::size_t counter = 0;

    // Frame: (node, next successor to try).
    std::vector<std::pair<std::size_t, std::size_t>> dfs;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        dfs.emplace_back(root, 0);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!dfs.empty()) {
            auto& [v, next] = dfs.back();
            bool descended = false;
            while (next < n) {
                const std::size_t w = next++;
                if (!g.has_edge(v, w)) continue;
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    dfs.emplace_back(w, 0);
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            const std::size_t node = v;
            if (low[node] == index[node]) {
                std::vector<std::size_t> comp;
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != node);
                std::sort(comp.begin(), comp.end());
                found.push_back(std::move(comp));
            }
            dfs.pop_back();
            if (!dfs.empty()) {
                const std::size_t parent = dfs.back().first;
                low[parent] = std::min(low[parent], low[node]);
            }
        }
    }

    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    SCCPartition p;
    p.component_of.assign(n, 0);
    for (std::size_t c = 0; c < found.size(); ++c)
        for (std::size_t node : found[c]) p.component_of[node] = c;
    p.components = std::move(found);
    return p;
}

/// Contracts every component to one node; A -> B iff some member edge crosses.
template <DirectedGraph G>
Digraph condense(const G& g, const SCCPartition& p) {
    const std::size_t n = g.node_count();
    if (p.component_of.size() != n) throw std::invalid_argument("condense: partition does not match network size");
    std::size_t covered = 0;
    for (std::size_t c = 0; c < p.components.size(); ++c)
        for (std::size_t node : p.components[c]) {
            if (node >= n || p.component_of[node] != c)
                throw std::invalid_argument("condense: inconsistent partition");
            ++covered;
        }
    if (covered != n) throw std::invalid_argument("condense: partition does not cover the network");

    Digraph out(p.components.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (g.has_edge(i, j) && p.component_of[i] != p.component_of[j])
                out.add_edge(p.component_of[i], p.component_of[j]);
    return out;
}

/// Kahn's algorithm; true when every node can be removed in topological order.
template <DirectedGraph G>
bool is_acyclic(const G& g) {
    const std::size_t n = g.node_count();
    std::vector<std::size_t> indeg = in_degrees(g);
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push_back(i);
    std::size_t removed = 0;
    while (!ready.empty()) {
        const std::size_t v = ready.back();
        ready.pop_back();
        ++removed;
        for (std::size_t w = 0; w < n; ++w)
            if (g.has_edge(v, w) && --indeg[w] == 0) ready.push_back(w);
    }
    return removed == n;
}

}  // namespace locnet
