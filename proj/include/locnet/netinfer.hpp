#pragma once

// Pairwise coupling-direction inference from inter-system recurrence
// structure, and the directed functional network built from all pairs.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "locnet/graph.hpp"
#include "locnet/matrix.hpp"
#include "locnet/recurrence.hpp"

namespace locnet {

enum class CouplingDirection { forward, backward, bidirectional };

inline std::string_view to_string(CouplingDirection d) {
    switch (d) {
        case CouplingDirection::forward: return "forward";
        case CouplingDirection::backward: return "backward";
        case CouplingDirection::bidirectional: return "bidirectional";
    }
    return "?";
}

/// Directed network over N oscillator nodes. Every construction path checks
/// that there are no self-loops and that each pair is linked at least one way.
class FunctionalNetwork {
public:
    FunctionalNetwork() = default;

    explicit FunctionalNetwork(Digraph adjacency) : adj_(std::move(adjacency)) { validate(); }

    [[nodiscard]] std::size_t node_count() const noexcept { return adj_.node_count(); }
    [[nodiscard]] bool has_edge(std::size_t i, std::size_t j) const noexcept { return adj_.has_edge(i, j); }
    [[nodiscard]] std::size_t edge_count() const noexcept { return adj_.edge_count(); }
    const Digraph& adjacency() const noexcept { return adj_; }

    std::vector<std::pair<std::size_t, std::size_t>> edges() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t i = 0; i < node_count(); ++i)
            for (std::size_t j = 0; j < node_count(); ++j)
                if (has_edge(i, j)) out.emplace_back(i, j);
        return out;
    }

    friend bool operator==(const FunctionalNetwork&, const FunctionalNetwork&) = default;

private:
    void validate() const {
        const std::size_t n = adj_.node_count();
        for (std::size_t i = 0; i < n; ++i) {
            if (adj_.has_edge(i, i)) throw std::logic_error("FunctionalNetwork: self-loop at node " + std::to_string(i));
            for (std::size_t j = i + 1; j < n; ++j)
                if (!adj_.has_edge(i, j) && !adj_.has_edge(j, i))
                    throw std::logic_error("FunctionalNetwork: nodes " + std::to_string(i) + " and " +
                                           std::to_string(j) + " are unlinked");
        }
    }

    Digraph adj_;
};

/// Per-pair measurements behind one direction decision.
struct PairDiagnostics {
    std::size_t i = 0;
    std::size_t j = 0;
    double epsilon = 0.0;
    double transitivity_ij = 0.0;  // T^{ij}: cross-triangles of i-points over j's recurrences
    double transitivity_ji = 0.0;
    double delta = 0.0;            // T^{ij} - T^{ji}
    double clustering_ij = 0.0;    // mean cross-clustering, logged only
    double clustering_ji = 0.0;
    bool degenerate_triples = false;
    CouplingDirection direction = CouplingDirection::bidirectional;

    /// Sign of the cross-clustering difference contradicts the decision.
    [[nodiscard]] bool clustering_disagrees() const noexcept {
        const double dc = clustering_ij - clustering_ji;
        return (direction == CouplingDirection::forward && dc < 0.0) ||
               (direction == CouplingDirection::backward && dc > 0.0);
    }
};

/// Raised for a constant series; `node` names the offending oscillator when
/// known.
class DegenerateSeriesError : public DegenerateInputError {
public:
    DegenerateSeriesError(std::size_t node, const std::string& what) : DegenerateInputError(what), node_(node) {}
    [[nodiscard]] std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

namespace detail {
inline bool is_constant(std::span<const double> s) {
    for (double v : s)
        if (v != s.front()) return false;
    return true;
}
}  // namespace detail

/// Embedded series with its self-distance matrix, reused across all pairs
/// that involve the node.
struct EmbeddedSeries {
    PointCloud cloud;
    Matrix<double> self;
};

inline EmbeddedSeries prepare_series(std::span<const double> x, const RecurrenceConfig& cfg) {
    EmbeddedSeries e{embed(x, cfg.embed_dim, cfg.embed_delay), {}};
    e.self = self_distances(e.cloud, cfg.metric);
    return e;
}

inline CouplingDirection classify_delta(double delta, double tol) {
    if (delta > tol) return CouplingDirection::forward;
    if (delta < -tol) return CouplingDirection::backward;
    return CouplingDirection::bidirectional;
}

/// Scratch buffers for pair measurements, reused across pairs.
struct PairWorkspace {
    Matrix<double> cross;
    std::vector<double> sample;
    std::vector<std::size_t> neighbours;
};

/// Pair measurement on prepared series.
inline PairDiagnostics infer_pair(const EmbeddedSeries& a, const EmbeddedSeries& b, const RecurrenceConfig& cfg,
                                  PairWorkspace& ws) {
    cross_distances_into(a.cloud, b.cloud, cfg.metric, ws.cross);
    double eps = cfg.epsilon;
    if (cfg.threshold_mode == ThresholdMode::fixed_recurrence_rate)
        eps = quantile_threshold(ws.cross.data(), cfg.recurrence_rate, ws.sample);

    const ClosureProfile p_ij = closure_profile(ws.cross, b.self, eps, Orientation::as_is, ws.neighbours);
    const ClosureProfile p_ji = closure_profile(ws.cross, a.self, eps, Orientation::transposed, ws.neighbours);
    const ClosureRatio t_ij = cross_transitivity(p_ij);
    const ClosureRatio t_ji = cross_transitivity(p_ji);

    PairDiagnostics d;
    d.epsilon = eps;
    d.transitivity_ij = t_ij.value;
    d.transitivity_ji = t_ji.value;
    d.degenerate_triples = t_ij.degenerate() || t_ji.degenerate();
    d.delta = t_ij.value - t_ji.value;
    d.clustering_ij = cross_clustering(p_ij).mean;
    d.clustering_ji = cross_clustering(p_ji).mean;
    d.direction = classify_delta(d.delta, cfg.direction_tol);
    return d;
}

inline PairDiagnostics infer_pair(const EmbeddedSeries& a, const EmbeddedSeries& b, const RecurrenceConfig& cfg) {
    PairWorkspace ws;
    return infer_pair(a, b, cfg, ws);
}

/// Measures both cross-transitivities of the pair (i, j) and applies the sign
/// rule: delta > tol gives i -> j, delta < -tol gives j -> i, otherwise both.
inline PairDiagnostics infer_pair(std::span<const double> x_i, std::span<const double> x_j,
                                  const RecurrenceConfig& cfg) {
    cfg.validate();
    if (x_i.size() != x_j.size()) throw std::invalid_argument("infer_pair: series lengths differ");
    if (detail::is_constant(x_i)) throw DegenerateSeriesError(0, "infer_pair: first series is constant");
    if (detail::is_constant(x_j)) throw DegenerateSeriesError(1, "infer_pair: second series is constant");
    return infer_pair(prepare_series(x_i, cfg), prepare_series(x_j, cfg), cfg);
}

inline CouplingDirection infer_pair_direction(std::span<const double> x_i, std::span<const double> x_j,
                                              const RecurrenceConfig& cfg) {
    return infer_pair(x_i, x_j, cfg).direction;
}

struct NetworkInference {
    FunctionalNetwork network;
    std::vector<PairDiagnostics> pairs;  // (i, j) with i < j, lexicographic

    [[nodiscard]] std::size_t clustering_disagreements() const {
        std::size_t n = 0;
        for (const auto& p : pairs) n += p.clustering_disagrees() ? 1 : 0;
        return n;
    }
};

/// Infers a direction for every unordered node pair of the rows of
/// `displacements` (one row per oscillator).
inline NetworkInference infer_network(const Matrix<double>& displacements, const RecurrenceConfig& cfg) {
    const std::size_t n = displacements.rows();
    if (n < 2) throw std::invalid_argument("build_functional_network: need at least 2 series");
    for (std::size_t i = 0; i < n; ++i)
        if (detail::is_constant(displacements.row(i)))
            throw DegenerateSeriesError(i, "build_functional_network: series " + std::to_string(i) + " is constant");

    cfg.validate();
    std::vector<EmbeddedSeries> prepared;
    prepared.reserve(n);
    for (std::size_t i = 0; i < n; ++i) prepared.push_back(prepare_series(displacements.row(i), cfg));

    PairWorkspace ws;
    Digraph adj(n);
    NetworkInference out;
    out.pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            PairDiagnostics d = infer_pair(prepared[i], prepared[j], cfg, ws);
            d.i = i;
            d.j = j;
            if (d.direction != CouplingDirection::backward) adj.add_edge(i, j);
            if (d.direction != CouplingDirection::forward) adj.add_edge(j, i);
            out.pairs.push_back(d);
        }
    out.network = FunctionalNetwork(std::move(adj));
    return out;
}

inline FunctionalNetwork build_functional_network(const Matrix<double>& displacements, const RecurrenceConfig& cfg) {
    return infer_network(displacements, cfg).network;
}

}  // namespace locnet
