#pragma once

// Cyclic chain of harmonically forced Duffing oscillators with nearest
// neighbour coupling:
//
//   M x'' + D x' + K1 x + F_nl(x) = f(t)
//
// with M = diag(m), D = alpha M, F_nl = k_nl x^3 (elementwise) and
// f(t) = F cos(Omega t) on every oscillator.

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "locnet/matrix.hpp"

namespace locnet {

/// How the diagonal of the linear stiffness matrix is assembled.
///
/// `grounded`: k1_i + 2 k_c. Each oscillator has its own ground spring k1_i and
/// two coupling springs to its ring neighbours. This is the default and the
/// layout under which a single oscillator is bistable for the default values.
///
/// `doubled`: 2 k1_i, independent of k_c.
enum class StiffnessDiagonal { grounded, doubled };

struct ModelParams {
    std::size_t n_osc = 10;
    std::vector<double> masses = std::vector<double>(10, 1.0);
    double alpha = 0.1;
    std::vector<double> k_lin = std::vector<double>(10, 1.0);
    double k_coupling = 0.1;
    std::vector<double> k_cubic = std::vector<double>(10, 2.0);
    double force_amp = 1.0;
    double force_freq = 2.0;
    StiffnessDiagonal diagonal = StiffnessDiagonal::grounded;

    /// Uniform chain of `n` oscillators with the reference parameter values.
    static ModelParams uniform(std::size_t n) {
        ModelParams p;
        p.n_osc = n;
        p.masses.assign(n, 1.0);
        p.k_lin.assign(n, 1.0);
        p.k_cubic.assign(n, 2.0);
        return p;
    }

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const {
        auto fail = [](const std::string& what) { throw std::invalid_argument("ModelParams: " + what); };
        if (n_osc < 2) fail("n_osc must be >= 2");
        if (masses.size() != n_osc) fail("masses has wrong length");
        if (k_lin.size() != n_osc) fail("k_lin has wrong length");
        if (k_cubic.size() != n_osc) fail("k_cubic has wrong length");
        for (double m : masses)
            if (!(m > 0.0) || !std::isfinite(m)) fail("masses must be positive");
        for (double k : k_lin)
            if (!(k >= 0.0) || !std::isfinite(k)) fail("k_lin must be non-negative");
        for (double k : k_cubic)
            if (!(k >= 0.0) || !std::isfinite(k)) fail("k_cubic must be non-negative");
        if (!(k_coupling >= 0.0)) fail("k_coupling must be non-negative");
        if (!(alpha >= 0.0)) fail("alpha must be non-negative");
        if (!std::isfinite(force_amp) || !std::isfinite(force_freq)) fail("forcing must be finite");
    }

    [[nodiscard]] std::size_t state_size() const noexcept { return 2 * n_osc; }
};

/// Phase-space state: the first n entries are displacements, the last n are
/// velocities.
class StateVector {
public:
    StateVector() = default;
    explicit StateVector(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() % 2 != 0) throw std::invalid_argument("StateVector: length must be even");
        for (double v : values_)
            if (!std::isfinite(v)) throw std::invalid_argument("StateVector: non-finite entry");
    }
    static StateVector zeros(std::size_t n_osc) { return StateVector(std::vector<double>(2 * n_osc, 0.0)); }

    [[nodiscard]] std::size_t n_osc() const noexcept { return values_.size() / 2; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> displacements() const noexcept { return {values_.data(), n_osc()}; }
    std::span<const double> velocities() const noexcept { return {values_.data() + n_osc(), n_osc()}; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    friend bool operator==(const StateVector&, const StateVector&) = default;

private:
    std::vector<double> values_;
};

struct SystemMatrices {
    Matrix<double> mass;
    Matrix<double> damping;
    Matrix<double> stiffness;
};

[[nodiscard]] inline double stiffness_diagonal(const ModelParams& p, std::size_t i) {
    return p.diagonal == StiffnessDiagonal::doubled ? 2.0 * p.k_lin[i] : p.k_lin[i] + 2.0 * p.k_coupling;
}

inline SystemMatrices assemble_matrices(const ModelParams& p) {
    p.validate();
    const std::size_t n = p.n_osc;
    SystemMatrices out{Matrix<double>(n, n), Matrix<double>(n, n), Matrix<double>(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.mass(i, i) = p.masses[i];
        out.damping(i, i) = p.alpha * p.masses[i];
        out.stiffness(i, i) = stiffness_diagonal(p, i);
        // Ring neighbours, including the wrap-around corners. For n == 2 both
        // neighbours coincide and the coupling is counted twice.
        out.stiffness(i, (i + 1) % n) -= p.k_coupling;
        out.stiffness(i, (i + n - 1) % n) -= p.k_coupling;
    }
    return out;
}

inline void nonlinear_force(std::span<const double> x, std::span<const double> k_cubic, std::span<double> out) {
    if (x.size() != k_cubic.size() || out.size() != x.size())
        throw std::invalid_argument("nonlinear_force: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = k_cubic[i] * x[i] * x[i] * x[i];
}

inline std::vector<double> nonlinear_force(std::span<const double> x, std::span<const double> k_cubic) {
    std::vector<double> out(x.size());
    nonlinear_force(x, k_cubic, out);
    return out;
}

/// First-order right-hand side. `state` and `deriv` have length 2N.
/// The ring coupling is applied directly rather than through the dense
/// stiffness matrix.
inline void equations_of_motion(double t, std::span<const double> state, const ModelParams& p,
                                std::span<double> deriv) {
    const std::size_t n = p.n_osc;
    const double* x = state.data();
    const double* v = state.data() + n;
    const double forcing = p.force_amp * std::cos(p.force_freq * t);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t left = (i + n - 1) % n;
        const std::size_t right = (i + 1) % n;
        const double linear = stiffness_diagonal(p, i) * x[i] - p.k_coupling * (x[left] + x[right]);
        const double cubic = p.k_cubic[i] * x[i] * x[i] * x[i];
        deriv[i] = v[i];
        deriv[n + i] = (forcing - p.alpha * p.masses[i] * v[i] - linear - cubic) / p.masses[i];
    }
}

inline StateVector equations_of_motion(double t, const StateVector& state, const ModelParams& p) {
    if (state.size() != p.state_size()) throw std::invalid_argument("equations_of_motion: state length != 2N");
    std::vector<double> d(state.size());
    equations_of_motion(t, state.values(), p, d);
    for (double v : d)
        if (!std::isfinite(v)) throw std::domain_error("equations_of_motion: non-finite derivative");
    return StateVector(std::move(d));
}

/// Multiplies every mass, linear stiffness and cubic stiffness by an
/// independent factor drawn uniformly from [1 - level, 1 + level].
/// Coupling, damping ratio and forcing are left untouched.
template <typename Rng>
ModelParams perturb_params(const ModelParams& p, double level, Rng& rng) {
    if (!(level >= 0.0 && level < 1.0)) throw std::invalid_argument("perturb_params: level must lie in [0, 1)");
    ModelParams out = p;
    if (level == 0.0) return out;
    std::uniform_real_distribution<double> factor(1.0 - level, 1.0 + level);
    for (auto* vec : {&out.masses, &out.k_lin, &out.k_cubic})
        for (double& value : *vec) value *= factor(rng);
    return out;
}

}  // namespace locnet
