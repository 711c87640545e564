#pragma once

// Ensemble simulation over a sweep of one oscillator's mass, in-degree
// statistics, SCC evolution and onset detection.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "locnet/graph.hpp"
#include "locnet/integrator.hpp"
#include "locnet/model.hpp"
#include "locnet/netinfer.hpp"
#include "locnet/recurrence.hpp"

namespace locnet {

/// Amplitude-contrast criterion standing in for a visual "localized" label.
struct LocalizationConfig {
    double window_fraction = 0.2;  // trailing share of samples used for amplitudes
    double ratio = 4.0;            // amplitude over median of the other oscillators

    void validate() const {
        if (!(window_fraction > 0.0 && window_fraction <= 1.0))
            throw std::invalid_argument("LocalizationConfig: window_fraction must lie in (0, 1]");
        if (!(ratio > 1.0)) throw std::invalid_argument("LocalizationConfig: ratio must exceed 1");
    }
};

/// `count` values evenly spaced from `from` to `to`, both included, in that order.
inline std::vector<double> linear_grid(double from, double to, std::size_t count) {
    if (count == 0) return {};
    if (count == 1) return {from};
    std::vector<double> g(count);
    for (std::size_t k = 0; k < count; ++k)
        g[k] = from + (to - from) * static_cast<double>(k) / static_cast<double>(count - 1);
    g.back() = to;
    return g;
}

struct ExperimentConfig {
    ModelParams model = ModelParams::uniform(10);
    std::vector<double> sweep_values = linear_grid(1.0, 0.8, 100);
    std::size_t target_index = 3;  // 0-based; oscillator four
    std::size_t ensemble_size = 100;
    double ic_low = 0.0;
    double ic_high = 0.1;
    std::uint64_t seed = 1;
    double t_end = 10.0;
    double dt_out = 0.05;
    double noise_level = 0.0;
    double param_jitter = 0.0;
    RecurrenceConfig recurrence;
    IntegratorConfig integrator;
    LocalizationConfig localization;
    std::optional<StateVector> reference_ic;  // traced for SCC evolution; ensemble IC 0 when unset
    std::size_t threads = 1;

    void validate() const {
        model.validate();
        recurrence.validate();
        integrator.validate();
        localization.validate();
        if (ensemble_size < 1) throw std::invalid_argument("ExperimentConfig: ensemble_size must be >= 1");
        if (!(ic_low < ic_high)) throw std::invalid_argument("ExperimentConfig: ic_low must be < ic_high");
        if (sweep_values.empty()) throw std::invalid_argument("ExperimentConfig: empty sweep");
        for (double v : sweep_values)
            if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("ExperimentConfig: sweep values must be positive");
        if (target_index >= model.n_osc) throw std::invalid_argument("ExperimentConfig: target_index out of range");
        if (!(t_end > 0.0) || !(dt_out > 0.0)) throw std::invalid_argument("ExperimentConfig: t_end and dt_out must be positive");
        if (!(noise_level >= 0.0)) throw std::invalid_argument("ExperimentConfig: noise_level must be >= 0");
        if (!(param_jitter >= 0.0 && param_jitter < 1.0))
            throw std::invalid_argument("ExperimentConfig: param_jitter must lie in [0, 1)");
        if (reference_ic && reference_ic->size() != model.state_size())
            throw std::invalid_argument("ExperimentConfig: reference IC length != 2N");
    }
};

// --- random streams -------------------------------------------------------

enum class StreamTag : std::uint32_t { initial_conditions = 1, jitter = 2, noise = 3 };

/// Independent generator for one (seed, purpose, cell) combination, so
/// results do not depend on evaluation order.
inline std::mt19937_64 make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag),  static_cast<std::uint32_t>(a),
                      static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b),
                      static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

inline std::vector<StateVector> sample_initial_conditions(std::size_t count, double low, double high,
                                                          std::size_t n_state, std::uint64_t seed) {
    if (!(low < high)) throw std::invalid_argument("sample_initial_conditions: low must be < high");
    auto rng = make_stream(seed, StreamTag::initial_conditions);
    std::uniform_real_distribution<double> u(low, high);
    std::vector<StateVector> out;
    out.reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
        std::vector<double> v(n_state);
        for (double& x : v) x = u(rng);
        out.emplace_back(std::move(v));
    }
    return out;
}

/// FNV-1a over the raw bytes of every IC entry.
inline std::uint64_t hash_initial_conditions(const std::vector<StateVector>& ics) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& ic : ics)
        for (double v : ic.values()) {
            unsigned char bytes[sizeof(double)];
            std::memcpy(bytes, &v, sizeof v);
            for (unsigned char c : bytes) {
                h ^= c;
                h *= 0x100000001b3ULL;
            }
        }
    return h;
}

inline double population_std(std::span<const double> s) {
    if (s.empty()) return 0.0;
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(s.size());
    double acc = 0.0;
    for (double v : s) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(s.size()));
}

/// Adds zero-mean Gaussian noise with sigma = level * std(series) to every
/// displacement series independently. Velocities are left untouched.
template <typename Rng>
Trajectory add_noise(const Trajectory& traj, double level, Rng& rng) {
    if (!(level >= 0.0)) throw std::invalid_argument("add_noise: level must be >= 0");
    Trajectory out = traj;
    if (level == 0.0) return out;
    for (std::size_t i = 0; i < out.n_osc(); ++i) {
        const double sigma = level * population_std(traj.displacements.row(i));
        if (sigma == 0.0) continue;
        std::normal_distribution<double> noise(0.0, sigma);
        for (double& x : out.displacements.row(i)) x += noise(rng);
    }
    return out;
}

namespace detail {
inline double median(std::vector<double> v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}
}  // namespace detail

/// Peak |x| of every oscillator over the trailing window.
inline std::vector<double> trailing_amplitudes(const Matrix<double>& displacements, double window_fraction) {
    const std::size_t samples = displacements.cols();
    const auto start = static_cast<std::size_t>(std::floor((1.0 - window_fraction) * static_cast<double>(samples)));
    std::vector<double> a(displacements.rows(), 0.0);
    for (std::size_t i = 0; i < displacements.rows(); ++i)
        for (std::size_t k = std::min(start, samples - 1); k < samples; ++k)
            a[i] = std::max(a[i], std::abs(displacements(i, k)));
    return a;
}

/// Index of the oscillator whose trailing amplitude exceeds `ratio` times the
/// median amplitude of all others; the largest such ratio wins.
inline std::optional<std::size_t> localization_oracle(const Trajectory& traj, const LocalizationConfig& cfg = {}) {
    cfg.validate();
    const std::size_t n = traj.n_osc();
    if (n < 2 || traj.n_samples() < 2) throw std::invalid_argument("localization_oracle: trajectory too small");
    const std::vector<double> a = trailing_amplitudes(traj.displacements, cfg.window_fraction);
    std::optional<std::size_t> best;
    double best_ratio = cfg.ratio;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> others;
        others.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) others.push_back(a[j]);
        const double med = detail::median(std::move(others));
        const double ratio = med > 0.0 ? a[i] / med : (a[i] > 0.0 ? INFINITY : 0.0);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best = i;
        }
    }
    return best;
}

// --- single case ------------------------------------------------------------

struct CaseResult {
    FunctionalNetwork network;
    std::vector<std::size_t> in_degrees;
    SCCPartition scc;
    std::optional<std::size_t> localized;
    std::size_t clustering_disagreements = 0;
};

struct CaseOptions {
    double t_end = 10.0;
    double dt_out = 0.05;
    double noise_level = 0.0;
    std::uint64_t noise_seed = 0;
    RecurrenceConfig recurrence;
    IntegratorConfig integrator;
    LocalizationConfig localization;
};

/// Simulate, optionally add measurement noise, infer the network and analyse it.
/// The oracle label is taken from the noise-free trajectory.
inline CaseResult run_case(const ModelParams& params, const StateVector& x0, const CaseOptions& opt) {
    const Trajectory clean = integrate(params, x0, opt.t_end, opt.dt_out, opt.integrator);
    CaseResult r;
    r.localized = localization_oracle(clean, opt.localization);
    NetworkInference inf;
    if (opt.noise_level > 0.0) {
        auto rng = make_stream(opt.noise_seed, StreamTag::noise);
        inf = infer_network(add_noise(clean, opt.noise_level, rng).displacements, opt.recurrence);
    } else {
        inf = infer_network(clean.displacements, opt.recurrence);
    }
    r.network = std::move(inf.network);
    r.clustering_disagreements = inf.clustering_disagreements();
    r.in_degrees = in_degrees(r.network);
    r.scc = strongly_connected_components(r.network);
    return r;
}

// --- sweep ------------------------------------------------------------------

struct EnsembleDegreeStats {
    std::vector<double> mean;
    std::vector<double> std;
    std::size_t count = 0;
};

/// Per-node population mean and 1/M standard deviation.
inline EnsembleDegreeStats degree_stats(const std::vector<std::vector<std::size_t>>& degree_vectors) {
    if (degree_vectors.empty()) throw std::invalid_argument("degree_stats: no degree vectors");
    const std::size_t n = degree_vectors.front().size();
    EnsembleDegreeStats s;
    s.count = degree_vectors.size();
    s.mean.assign(n, 0.0);
    s.std.assign(n, 0.0);
    for (const auto& z : degree_vectors) {
        if (z.size() != n) throw std::invalid_argument("degree_stats: inconsistent node counts");
        for (std::size_t i = 0; i < n; ++i) s.mean[i] += static_cast<double>(z[i]);
    }
    const double m = static_cast<double>(s.count);
    for (double& v : s.mean) v /= m;
    for (const auto& z : degree_vectors)
        for (std::size_t i = 0; i < n; ++i) {
            const double d = static_cast<double>(z[i]) - s.mean[i];
            s.std[i] += d * d;
        }
    for (double& v : s.std) v = std::sqrt(v / m);
    return s;
}

struct SweepCell {
    std::optional<CaseResult> result;  // empty when the case failed
    std::string error;
};

struct SweepResult {
    std::vector<double> sweep_values;
    std::size_t n_osc = 0;
    std::size_t target_index = 0;
    std::vector<StateVector> initial_conditions;
    std::uint64_t ic_hash = 0;
    std::vector<std::vector<SweepCell>> cells;  // [value][ic]
    std::vector<EnsembleDegreeStats> stats;     // per value, failed cells excluded
    std::vector<SweepCell> reference;           // per value, the traced IC

    [[nodiscard]] std::size_t failed_cells() const {
        std::size_t n = 0;
        for (const auto& row : cells)
            for (const auto& c : row) n += c.result ? 0 : 1;
        return n;
    }
};

namespace detail {

inline CaseOptions case_options(const ExperimentConfig& cfg) {
    CaseOptions opt;
    opt.t_end = cfg.t_end;
    opt.dt_out = cfg.dt_out;
    opt.noise_level = cfg.noise_level;
    opt.recurrence = cfg.recurrence;
    opt.integrator = cfg.integrator;
    opt.localization = cfg.localization;
    return opt;
}

// Cell index `ic` == ensemble size denotes the reference IC.
inline SweepCell run_cell(const ExperimentConfig& cfg, std::size_t value_idx, std::size_t ic,
                          const StateVector& x0) {
    SweepCell cell;
    try {
        ModelParams params = cfg.model;
        params.masses[cfg.target_index] = cfg.sweep_values[value_idx];
        if (cfg.param_jitter > 0.0) {
            auto rng = make_stream(cfg.seed, StreamTag::jitter, value_idx, ic);
            params = perturb_params(params, cfg.param_jitter, rng);
        }
        CaseOptions opt = case_options(cfg);
        std::seed_seq mix{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(value_idx), static_cast<std::uint32_t>(ic)};
        std::uint32_t derived[2];
        mix.generate(derived, derived + 2);
        opt.noise_seed = (static_cast<std::uint64_t>(derived[0]) << 32) | derived[1];
        cell.result = run_case(params, x0, opt);
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

}  // namespace detail

/// Called with (finished cells, total cells); never concurrently.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

/// Runs every (sweep value, IC) cell. The same ICs are reused for every sweep
/// value. Results are independent of `cfg.threads`.
inline SweepResult sweep(const ExperimentConfig& cfg, const ProgressFn& progress = {}) {
    cfg.validate();
    SweepResult out;
    out.sweep_values = cfg.sweep_values;
    out.n_osc = cfg.model.n_osc;
    out.target_index = cfg.target_index;
    out.initial_conditions =
        sample_initial_conditions(cfg.ensemble_size, cfg.ic_low, cfg.ic_high, cfg.model.state_size(), cfg.seed);
    out.ic_hash = hash_initial_conditions(out.initial_conditions);

    const std::size_t values = cfg.sweep_values.size();
    const std::size_t m = cfg.ensemble_size;
    const std::size_t per_value = m + (cfg.reference_ic ? 1 : 0);
    out.cells.assign(values, std::vector<SweepCell>(m));
    out.reference.assign(values, SweepCell{});

    const std::size_t total = values * per_value;
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex progress_mutex;
    auto worker = [&]() {
        for (std::size_t job = next++; job < total; job = next++) {
            const std::size_t v = job / per_value;
            const std::size_t ic = job % per_value;
            if (ic < m)
                out.cells[v][ic] = detail::run_cell(cfg, v, ic, out.initial_conditions[ic]);
            else
                out.reference[v] = detail::run_cell(cfg, v, m, *cfg.reference_ic);
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(++done, total);
            }
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, cfg.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (!cfg.reference_ic)
        for (std::size_t v = 0; v < values; ++v) out.reference[v] = out.cells[v][0];

    out.stats.reserve(values);
    for (std::size_t v = 0; v < values; ++v) {
        std::vector<std::vector<std::size_t>> z;
        for (const auto& c : out.cells[v])
            if (c.result) z.push_back(c.result->in_degrees);
        out.stats.push_back(z.empty() ? EnsembleDegreeStats{std::vector<double>(out.n_osc, NAN),
                                                            std::vector<double>(out.n_osc, NAN), 0}
                                      : degree_stats(z));
    }
    return out;
}

// --- onset detection ----------------------------------------------------------

struct DetectionReport {
    std::optional<std::size_t> node;           // 0-based
    std::optional<double> m4_mean_zero;
    std::optional<double> m4_first_zero;
    std::optional<double> m4_scc_split;
    std::optional<double> m4_first_localized;
    std::optional<double> m4_always_localized;
    // Per-node scan results (same definitions as above, for every node).
    std::vector<std::optional<double>> mean_zero_by_node;
    std::vector<std::optional<double>> first_zero_by_node;
    std::vector<std::optional<double>> scc_split_by_node;
};

/// Scans the sweep from its largest value downward and records, per node, the
/// first value with (a) any single-IC in-degree of zero, (b) an ensemble mean
/// in-degree of zero, (c) a singleton SCC for the reference IC. The node that
/// reaches (b) first is flagged.
inline DetectionReport detect_onset(const SweepResult& s) {
    const std::size_t n = s.n_osc;
    std::vector<std::size_t> order(s.sweep_values.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.sweep_values[a] > s.sweep_values[b]; });

    DetectionReport r;
    r.mean_zero_by_node.assign(n, std::nullopt);
    r.first_zero_by_node.assign(n, std::nullopt);
    r.scc_split_by_node.assign(n, std::nullopt);
    for (std::size_t v : order) {
        const double value = s.sweep_values[v];
        for (std::size_t i = 0; i < n; ++i) {
            if (!r.first_zero_by_node[i])
                for (const auto& c : s.cells[v])
                    if (c.result && c.result->in_degrees[i] == 0) {
                        r.first_zero_by_node[i] = value;
                        break;
                    }
            if (!r.mean_zero_by_node[i] && s.stats[v].count > 0 && s.stats[v].mean[i] == 0.0)
                r.mean_zero_by_node[i] = value;
            if (!r.scc_split_by_node[i] && s.reference[v].result && s.reference[v].result->scc.is_singleton(i))
                r.scc_split_by_node[i] = value;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (r.mean_zero_by_node[i] && (!r.node || *r.mean_zero_by_node[i] > *r.mean_zero_by_node[*r.node]))
            r.node = i;
    if (r.node) {
        r.m4_mean_zero = r.mean_zero_by_node[*r.node];
        r.m4_first_zero = r.first_zero_by_node[*r.node];
        r.m4_scc_split = r.scc_split_by_node[*r.node];
    }

    // Oracle thresholds: largest value with any localized label, and largest
    // value at and below which every label is localized.
    for (std::size_t v : order) {
        const bool any = std::any_of(s.cells[v].begin(), s.cells[v].end(),
                                     [](const SweepCell& c) { return c.result && c.result->localized; });
        if (any) {
            r.m4_first_localized = s.sweep_values[v];
            break;
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        bool all = true;
        for (const auto& c : s.cells[*it])
            if (c.result) all = all && c.result->localized.has_value();
        if (!all) break;
        r.m4_always_localized = s.sweep_values[*it];
    }
    return r;
}

/// Component index of every node at every sweep value (rows follow the sweep
/// order). `ic_index` selects an ensemble IC; std::nullopt selects the
/// reference IC.
inline Matrix<std::size_t> scc_trace(const SweepResult& s, std::optional<std::size_t> ic_index) {
    if (ic_index && *ic_index >= s.initial_conditions.size())
        throw std::out_of_range("scc_trace: ic_index out of range");
    constexpr std::size_t missing = static_cast<std::size_t>(-1);
    Matrix<std::size_t> table(s.sweep_values.size(), s.n_osc, missing);
    for (std::size_t v = 0; v < s.sweep_values.size(); ++v) {
        const SweepCell& c = ic_index ? s.cells[v][*ic_index] : s.reference[v];
        if (!c.result) continue;
        for (std::size_t i = 0; i < s.n_osc; ++i) table(v, i) = c.result->scc.component_of[i];
    }
    return table;
}

}  // namespace locnet
