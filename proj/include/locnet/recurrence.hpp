#pragma once

// Time-delay embedding, recurrence thresholds, (cross-)recurrence matrices and
// the inter-system cross-transitivity / cross-clustering measures.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "locnet/matrix.hpp"

namespace locnet {

enum class Metric { euclidean, supremum };
enum class ThresholdMode { fixed_epsilon, fixed_recurrence_rate };

struct RecurrenceConfig {
    std::size_t embed_dim = 2;
    std::size_t embed_delay = 3;
    ThresholdMode threshold_mode = ThresholdMode::fixed_recurrence_rate;
    double epsilon = 0.1;
    double recurrence_rate = 0.10;
    Metric metric = Metric::euclidean;
    double direction_tol = 0.025;

    void validate() const {
        if (embed_dim < 1) throw std::invalid_argument("RecurrenceConfig: embed_dim must be >= 1");
        if (embed_delay < 1) throw std::invalid_argument("RecurrenceConfig: embed_delay must be >= 1");
        if (!(recurrence_rate > 0.0 && recurrence_rate < 1.0))
            throw std::invalid_argument("RecurrenceConfig: recurrence_rate must lie in (0, 1)");
        if (!(direction_tol >= 0.0)) throw std::invalid_argument("RecurrenceConfig: direction_tol must be >= 0");
        if (threshold_mode == ThresholdMode::fixed_epsilon && !(epsilon >= 0.0))
            throw std::invalid_argument("RecurrenceConfig: epsilon must be >= 0");
    }
};

/// Raised when a series or point cloud carries no distance information
/// (constant input), so no threshold can be selected.
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Points in rows, coordinates in columns.
using PointCloud = Matrix<double>;

inline PointCloud embed(std::span<const double> series, std::size_t dim, std::size_t delay) {
    if (dim < 1 || delay < 1) throw std::invalid_argument("embed: dim and delay must be >= 1");
    const std::size_t span_len = (dim - 1) * delay;
    if (series.size() <= span_len) throw std::invalid_argument("embed: series too short for embedding");
    const std::size_t points = series.size() - span_len;
    PointCloud cloud(points, dim);
    for (std::size_t k = 0; k < points; ++k)
        for (std::size_t d = 0; d < dim; ++d) cloud(k, d) = series[k + d * delay];
    return cloud;
}

inline double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    double acc = 0.0;
    if (metric == Metric::supremum) {
        for (std::size_t d = 0; d < a.size(); ++d) acc = std::max(acc, std::abs(a[d] - b[d]));
        return acc;
    }
    for (std::size_t d = 0; d < a.size(); ++d) acc += (a[d] - b[d]) * (a[d] - b[d]);
    return std::sqrt(acc);
}

/// Bit-packed binary matrix; each row is a run of 64-bit words.
class BinaryMatrix {
public:
    BinaryMatrix() = default;
    BinaryMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), words_((cols + 63) / 64), bits_(rows * words_, 0) {}

    /// Reshapes to rows x cols and clears every bit, reusing storage.
    void reset(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
        words_ = (cols + 63) / 64;
        bits_.assign(rows * words_, 0);
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t words_per_row() const noexcept { return words_; }

    [[nodiscard]] bool get(std::size_t r, std::size_t c) const noexcept {
        return (bits_[r * words_ + c / 64] >> (c % 64)) & 1U;
    }
    void set(std::size_t r, std::size_t c, bool value = true) noexcept {
        auto& w = bits_[r * words_ + c / 64];
        const std::uint64_t mask = std::uint64_t{1} << (c % 64);
        w = value ? (w | mask) : (w & ~mask);
    }

    std::span<const std::uint64_t> row_words(std::size_t r) const noexcept {
        return {bits_.data() + r * words_, words_};
    }
    std::span<std::uint64_t> row_words(std::size_t r) noexcept { return {bits_.data() + r * words_, words_}; }

    [[nodiscard]] std::size_t row_count(std::size_t r) const noexcept {
        std::size_t n = 0;
        for (auto w : row_words(r)) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }
    [[nodiscard]] std::size_t count() const noexcept {
        std::size_t n = 0;
        for (auto w : bits_) n += static_cast<std::size_t>(std::popcount(w));
        return n;
    }

    [[nodiscard]] BinaryMatrix transposed() const {
        BinaryMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                if (get(r, c)) out.set(c, r);
        return out;
    }

    static BinaryMatrix from_dense(const Matrix<int>& m) {
        BinaryMatrix out(m.rows(), m.cols());
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c)
                if (m(r, c) != 0) out.set(r, c);
        return out;
    }

    friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> bits_;
};

struct CrossRecurrenceMatrix {
    BinaryMatrix entries;
    double epsilon_used = 0.0;
    double density = 0.0;
};

inline void cross_distances_into(const PointCloud& a, const PointCloud& b, Metric metric, Matrix<double>& d) {
    if (a.cols() != b.cols()) throw std::invalid_argument("cross_distances: dimension mismatch");
    const std::size_t dim = a.cols(), q_count = b.rows();
    d.resize(a.rows(), q_count);
    const Matrix<double> bt = b.transposed();
    for (std::size_t p = 0; p < a.rows(); ++p) {
        double* out = d.row(p).data();
        std::fill(out, out + q_count, 0.0);
        for (std::size_t k = 0; k < dim; ++k) {
            const double ak = a(p, k);
            const double* col = bt.row(k).data();
            if (metric == Metric::supremum) {
                for (std::size_t q = 0; q < q_count; ++q) out[q] = std::max(out[q], std::abs(ak - col[q]));
            } else {
                for (std::size_t q = 0; q < q_count; ++q) out[q] += (ak - col[q]) * (ak - col[q]);
            }
        }
        if (metric == Metric::euclidean)
            for (std::size_t q = 0; q < q_count; ++q) out[q] = std::sqrt(out[q]);
    }
}

/// All pairwise distances between the points of `a` (rows) and `b` (columns).
inline Matrix<double> cross_distances(const PointCloud& a, const PointCloud& b, Metric metric) {
    Matrix<double> d;
    cross_distances_into(a, b, metric, d);
    return d;
}

/// Symmetric self-distance matrix of one cloud.
inline Matrix<double> self_distances(const PointCloud& a, Metric metric) { return cross_distances(a, a, metric); }

/// k-th smallest value (0-based) of `d`. A scattered sample brackets the rank
/// so that only values inside the bracket need exact selection; if the
/// bracket misses, the whole sample is selected instead. `scratch` is reused.
inline double order_statistic(std::span<const double> d, std::size_t k, std::vector<double>& scratch) {
    const std::size_t n = d.size();
    if (k >= n) throw std::out_of_range("order_statistic: rank out of range");
    constexpr std::size_t sample_size = 512;
    if (n > 8 * sample_size) {
        scratch.clear();
        // Golden-ratio scatter avoids aliasing with periodic structure in d.
        const double phi = 0.6180339887498949;
        double u = 0.0;
        for (std::size_t i = 0; i < sample_size; ++i) {
            u += phi;
            u -= std::floor(u);
            scratch.push_back(d[std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)))]);
        }
        std::sort(scratch.begin(), scratch.end());
        const double pos = static_cast<double>(k) / static_cast<double>(n) * static_cast<double>(sample_size);
        const double q = static_cast<double>(k) / static_cast<double>(n);
        const auto margin = static_cast<std::ptrdiff_t>(4.0 * std::sqrt(sample_size * q * (1.0 - q)) + 2.0);
        const auto centre = static_cast<std::ptrdiff_t>(pos);
        const auto last = static_cast<std::ptrdiff_t>(sample_size) - 1;
        const double lo = scratch[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(centre - margin, 0, last))];
        const double hi = scratch[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(centre + margin, 0, last))];
        std::size_t below = 0;
        scratch.clear();
        for (double x : d) {
            below += x < lo ? 1 : 0;
            if (x >= lo && x <= hi) scratch.push_back(x);
        }
        if (below <= k && k - below < scratch.size()) {
            const auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(k - below);
            std::nth_element(scratch.begin(), nth, scratch.end());
            return *nth;
        }
    }
    scratch.assign(d.begin(), d.end());
    const auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(k);
    std::nth_element(scratch.begin(), nth, scratch.end());
    return *nth;
}

/// rho-quantile of a distance sample, taken as an order statistic so that at
/// least ceil(rho * n) of the values lie at or below it.
inline double quantile_threshold(std::span<const double> d, double rho, std::vector<double>& scratch) {
    if (d.empty()) throw std::invalid_argument("threshold_for_rate: empty point cloud");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("threshold_for_rate: rho must lie in (0, 1)");
    if (std::all_of(d.begin(), d.end(), [&](double x) { return x == d.front(); }))
        throw DegenerateInputError("threshold_for_rate: all cross-distances are equal");
    const double target = std::ceil(rho * static_cast<double>(d.size()));
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(target), 1, d.size()) - 1;
    return order_statistic(d, k, scratch);
}

inline double quantile_threshold(std::span<const double> d, double rho) {
    std::vector<double> scratch;
    return quantile_threshold(d, rho, scratch);
}

/// Distance threshold at which the cross-recurrence density of the two clouds
/// is `rho`.
inline double threshold_for_rate(const PointCloud& a, const PointCloud& b, double rho, Metric metric) {
    if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("threshold_for_rate: empty point cloud");
    const Matrix<double> d = cross_distances(a, b, metric);
    return quantile_threshold(d.data(), rho);
}

enum class Orientation { as_is, transposed };

/// Writes the entries of `d` (or of its transpose) with distance <= epsilon
/// into `out`. With `clear_diagonal` the main diagonal is left empty.
inline void threshold_into(const Matrix<double>& d, double epsilon, BinaryMatrix& out, bool clear_diagonal = false,
                           Orientation orient = Orientation::as_is) {
    const bool tr = orient == Orientation::transposed;
    const std::size_t rows = tr ? d.cols() : d.rows();
    const std::size_t cols = tr ? d.rows() : d.cols();
    const std::size_t stride = d.cols();
    const double* base = d.data().data();
    out.reset(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        auto words = out.row_words(r);
        for (std::size_t w = 0; w < words.size(); ++w) {
            const std::size_t c0 = w * 64;
            const std::size_t c1 = std::min(cols, c0 + 64);
            std::uint64_t word = 0;
            if (tr) {
                for (std::size_t c = c0; c < c1; ++c)
                    word |= static_cast<std::uint64_t>(base[c * stride + r] <= epsilon) << (c - c0);
            } else {
                const double* row = base + r * stride;
                for (std::size_t c = c0; c < c1; ++c) word |= static_cast<std::uint64_t>(row[c] <= epsilon) << (c - c0);
            }
            words[w] = word;
        }
        if (clear_diagonal && r < cols) words[r / 64] &= ~(std::uint64_t{1} << (r % 64));
    }
}

inline BinaryMatrix threshold_matrix(const Matrix<double>& d, double epsilon, bool clear_diagonal = false) {
    BinaryMatrix out;
    threshold_into(d, epsilon, out, clear_diagonal);
    return out;
}

inline CrossRecurrenceMatrix cross_recurrence_matrix(const PointCloud& a, const PointCloud& b, double epsilon,
                                                     Metric metric) {
    CrossRecurrenceMatrix out{threshold_matrix(cross_distances(a, b, metric), epsilon), epsilon, 0.0};
    const double cells = static_cast<double>(a.rows() * b.rows());
    out.density = cells > 0 ? static_cast<double>(out.entries.count()) / cells : 0.0;
    return out;
}

/// Single-system recurrence matrix with the main diagonal cleared.
inline BinaryMatrix recurrence_matrix(const PointCloud& cloud, double epsilon, Metric metric) {
    return threshold_matrix(self_distances(cloud, metric), epsilon, true);
}

/// Triangle-to-triple ratio. `value` is 0 when there are no triples, which
/// `degenerate()` reports.
struct ClosureRatio {
    std::uint64_t triangles = 0;
    std::uint64_t triples = 0;
    double value = 0.0;

    [[nodiscard]] bool degenerate() const noexcept { return triples == 0; }
};

namespace detail {

// Number of ordered pairs (p, q), p != q, with cr[v][p] = cr[v][q] = rec[p][q] = 1.
inline std::uint64_t closed_pairs(const BinaryMatrix& cr, const BinaryMatrix& rec, std::size_t v) {
    const auto row = cr.row_words(v);
    std::uint64_t total = 0;
    for (std::size_t w = 0; w < row.size(); ++w) {
        std::uint64_t bits = row[w];
        while (bits != 0) {
            const std::size_t p = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
            bits &= bits - 1;
            const auto rp = rec.row_words(p);
            std::uint64_t closed = 0;
            for (std::size_t u = 0; u < row.size(); ++u) closed += static_cast<std::uint64_t>(std::popcount(rp[u] & row[u]));
            if (rec.get(p, p)) --closed;  // q == p excluded
            total += closed;
        }
    }
    return total;
}

inline void check_shapes(const BinaryMatrix& cr, const BinaryMatrix& rec, const char* who) {
    if (rec.rows() != rec.cols() || cr.cols() != rec.rows())
        throw std::invalid_argument(std::string(who) + ": incompatible matrix shapes");
}

}  // namespace detail

/// Per-node closed-pair and neighbour counts of A against B, from which both
/// cross-transitivity and cross-clustering follow.
struct ClosureProfile {
    std::vector<std::uint64_t> closed;
    std::vector<std::uint64_t> degree;
};

inline ClosureProfile closure_profile(const BinaryMatrix& cr_ab, const BinaryMatrix& rec_b) {
    detail::check_shapes(cr_ab, rec_b, "closure_profile");
    ClosureProfile out{std::vector<std::uint64_t>(cr_ab.rows(), 0), std::vector<std::uint64_t>(cr_ab.rows(), 0)};
    for (std::size_t v = 0; v < cr_ab.rows(); ++v) {
        out.degree[v] = cr_ab.row_count(v);
        if (out.degree[v] >= 2) out.closed[v] = detail::closed_pairs(cr_ab, rec_b, v);
    }
    return out;
}

/// Same counts taken straight from distances: `cross` holds A-to-B distances
/// (or B-to-A when `orient` is transposed), `self_b` the distances within B.
/// Equivalent to thresholding both at `epsilon` with the diagonal of the
/// recurrence matrix cleared.
inline ClosureProfile closure_profile(const Matrix<double>& cross, const Matrix<double>& self_b, double epsilon,
                                      Orientation orient, std::vector<std::size_t>& neighbours) {
    const bool tr = orient == Orientation::transposed;
    const std::size_t rows = tr ? cross.cols() : cross.rows();
    const std::size_t cols = tr ? cross.rows() : cross.cols();
    if (self_b.rows() != cols || self_b.cols() != cols)
        throw std::invalid_argument("closure_profile: incompatible matrix shapes");
    const std::size_t stride = cross.cols();
    const double* base = cross.data().data();
    ClosureProfile out{std::vector<std::uint64_t>(rows, 0), std::vector<std::uint64_t>(rows, 0)};
    for (std::size_t v = 0; v < rows; ++v) {
        neighbours.clear();
        for (std::size_t c = 0; c < cols; ++c)
            if ((tr ? base[c * stride + v] : base[v * stride + c]) <= epsilon) neighbours.push_back(c);
        out.degree[v] = neighbours.size();
        std::uint64_t closed = 0;
        for (std::size_t x = 0; x < neighbours.size(); ++x) {
            const auto row = self_b.row(neighbours[x]);
            for (std::size_t y = x + 1; y < neighbours.size(); ++y) closed += row[neighbours[y]] <= epsilon ? 1 : 0;
        }
        out.closed[v] = 2 * closed;
    }
    return out;
}

inline ClosureRatio cross_transitivity(const ClosureProfile& prof) {
    ClosureRatio r;
    for (std::size_t v = 0; v < prof.degree.size(); ++v) {
        const std::uint64_t k = prof.degree[v];
        if (k < 2) continue;
        r.triples += k * (k - 1);
        r.triangles += prof.closed[v];
    }
    r.value = r.triples == 0 ? 0.0 : static_cast<double>(r.triangles) / static_cast<double>(r.triples);
    return r;
}

/// Cross-transitivity of system A with respect to system B:
/// closed cross-triangles (v in A; p, q in B) over cross-triples.
inline ClosureRatio cross_transitivity(const BinaryMatrix& cr_ab, const BinaryMatrix& rec_b) {
    return cross_transitivity(closure_profile(cr_ab, rec_b));
}

struct CrossClustering {
    std::vector<double> per_node;
    double mean = 0.0;
};

/// Nodes with fewer than two cross-neighbours contribute 0.
inline CrossClustering cross_clustering(const ClosureProfile& prof) {
    CrossClustering out;
    out.per_node.assign(prof.degree.size(), 0.0);
    double sum = 0.0;
    for (std::size_t v = 0; v < prof.degree.size(); ++v) {
        const std::uint64_t k = prof.degree[v];
        if (k < 2) continue;
        out.per_node[v] = static_cast<double>(prof.closed[v]) / static_cast<double>(k * (k - 1));
        sum += out.per_node[v];
    }
    out.mean = prof.degree.empty() ? 0.0 : sum / static_cast<double>(prof.degree.size());
    return out;
}

/// Local cross-clustering of every node of A with respect to B, and its mean.
inline CrossClustering cross_clustering(const BinaryMatrix& cr_ab, const BinaryMatrix& rec_b) {
    return cross_clustering(closure_profile(cr_ab, rec_b));
}

}  // namespace locnet
