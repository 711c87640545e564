#pragma once

// Dormand-Prince 5(4) with embedded error control and the order-4 continuous
// extension, sampled onto a uniform output grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "locnet/matrix.hpp"
#include "locnet/model.hpp"

namespace locnet {

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    std::size_t max_steps = 1'000'000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
        if (max_steps == 0) throw std::invalid_argument("IntegratorConfig: max_steps must be positive");
    }
};

class IntegrationError : public std::runtime_error {
public:
    enum class Kind { step_underflow, step_budget, non_finite };

    IntegrationError(Kind kind, double t, const std::string& what)
        : std::runtime_error(what), kind_(kind), time_(t) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    Kind kind_;
    double time_;
};

/// Number of samples on [0, t_end] at spacing dt, including t = 0.
[[nodiscard]] inline std::size_t grid_size(double t_end, double dt) {
    return static_cast<std::size_t>(std::llround(t_end / dt)) + 1;
}

/// Samples of the full state on the uniform grid k * dt_out, one row per sample.
struct DenseSolution {
    double dt = 0.0;
    Matrix<double> states;  // T x n_state
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

namespace detail::dp5 {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// 5th minus 4th order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner, DOPRI5 dense output).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace detail::dp5

/// Integrates y' = rhs(t, y, dydt) from t = 0 to t_end and returns the
/// solution at t = k * dt_out. `rhs` has signature
/// void(double, std::span<const double>, std::span<double>).
template <typename Rhs>
DenseSolution integrate_system(Rhs&& rhs, std::span<const double> y0, double t_end, double dt_out,
                               const IntegratorConfig& cfg = {}) {
    using namespace detail::dp5;
    cfg.validate();
    if (!(t_end > 0.0) || !(dt_out > 0.0)) throw std::invalid_argument("integrate: t_end and dt_out must be positive");
    const std::size_t n = y0.size();
    const std::size_t samples = grid_size(t_end, dt_out);
    const double t_final = static_cast<double>(samples - 1) * dt_out;

    DenseSolution sol;
    sol.dt = dt_out;
    sol.states = Matrix<double>(samples, n);
    std::copy(y0.begin(), y0.end(), sol.states.row(0).begin());
    if (samples == 1) return sol;

    std::vector<double> y(y0.begin(), y0.end()), y1(n), ytmp(n), err(n);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    std::vector<double> r1(n), r2(n), r3(n), r4(n), r5(n);

    auto error_norm = [&](const std::vector<double>& e, const std::vector<double>& ya, const std::vector<double>& yb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            acc += (e[i] / sc) * (e[i] / sc);
        }
        return std::sqrt(acc / static_cast<double>(n));
    };

    double t = 0.0;
    rhs(t, std::span<const double>(y), std::span<double>(k1));

    // Initial step guess.
    double h;
    {
        double d0 = 0.0, d1n = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1n += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0 / n);
        d1n = std::sqrt(d1n / n);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, t_final);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h0 * k1[i];
        rhs(t + h0, std::span<const double>(ytmp), std::span<double>(k2));
        double d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
            d2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
        }
        d2 = std::sqrt(d2 / n) / h0;
        const double dmax = std::max(d1n, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
        h = std::min(100.0 * h0, h1);
    }

    constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04, expo = 0.2 - beta * 0.75;
    double err_old = 1e-4;
    std::size_t next_out = 1;
    bool last_rejected = false;

    for (std::size_t step = 0;; ++step) {
        if (step >= cfg.max_steps)
            throw IntegrationError(IntegrationError::Kind::step_budget, t, "integrate: step budget exhausted");
        bool hits_end = false;
        if (t + h >= t_final) {
            h = t_final - t;
            hits_end = true;
        }
        const double h_floor = 10.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
        if (hits_end && h < h_floor) {
            // Rounding left a negligible remainder; the current state is the endpoint.
            for (; next_out < samples; ++next_out) std::copy(y.begin(), y.end(), sol.states.row(next_out).begin());
            break;
        }
        if (h < h_floor)
            throw IntegrationError(IntegrationError::Kind::step_underflow, t, "integrate: step size underflow");

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, std::span<const double>(ytmp), std::span<double>(k2));
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, std::span<const double>(ytmp), std::span<double>(k3));
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, std::span<const double>(ytmp), std::span<double>(k4));
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, std::span<const double>(ytmp), std::span<double>(k5));
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(t + h, std::span<const double>(ytmp), std::span<double>(k6));
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        rhs(t + h, std::span<const double>(y1), std::span<double>(k7));
        for (std::size_t i = 0; i < n; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

        const double e = error_norm(err, y, y1);
        if (!std::isfinite(e)) {
            bool state_finite = true;
            for (double v : y1) state_finite = state_finite && std::isfinite(v);
            if (!state_finite && h < 1e-8)
                throw IntegrationError(IntegrationError::Kind::non_finite, t, "integrate: non-finite state");
            h *= fac_min;
            last_rejected = true;
            ++sol.rejected_steps;
            continue;
        }

        if (e <= 1.0) {
            const double t_new = t + h;
            // Dense output coefficients for (t, t + h].
            for (std::size_t i = 0; i < n; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                r1[i] = y[i];
                r2[i] = ydiff;
                r3[i] = bspl;
                r4[i] = ydiff - h * k7[i] - bspl;
                r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            const bool final_step = hits_end;
            while (next_out < samples) {
                const double t_out = static_cast<double>(next_out) * dt_out;
                if (t_out > t_new && !final_step) break;
                auto dst = sol.states.row(next_out);
                if (next_out == samples - 1 && final_step) {
                    std::copy(y1.begin(), y1.end(), dst.begin());
                } else {
                    const double theta = (t_out - t) / h;
                    const double theta1 = 1.0 - theta;
                    for (std::size_t i = 0; i < n; ++i)
                        dst[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
                }
                for (double v : dst)
                    if (!std::isfinite(v))
                        throw IntegrationError(IntegrationError::Kind::non_finite, t_out, "integrate: non-finite state");
                ++next_out;
            }
            ++sol.accepted_steps;
            if (final_step) break;

            double fac = std::pow(e, expo) * std::pow(err_old, -beta) / safety;
            fac = std::clamp(fac, 1.0 / fac_max, 1.0 / fac_min);
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            err_old = std::max(e, 1e-4);
            y.swap(y1);
            k1.swap(k7);
            t = t_new;
            h = h_new;
            last_rejected = false;
        } else {
            const double fac = std::min(1.0 / fac_min, std::pow(e, 0.2) / safety);
            h /= fac;
            last_rejected = true;
            ++sol.rejected_steps;
        }
    }
    return sol;
}

/// Uniformly sampled history of all oscillators. Rows are oscillators,
/// columns are samples.
struct Trajectory {
    double dt = 0.05;
    std::vector<double> times;
    Matrix<double> displacements;  // N x T
    Matrix<double> velocities;     // N x T

    [[nodiscard]] std::size_t n_osc() const noexcept { return displacements.rows(); }
    [[nodiscard]] std::size_t n_samples() const noexcept { return times.size(); }
};

inline Trajectory to_trajectory(const DenseSolution& sol) {
    const std::size_t samples = sol.states.rows();
    const std::size_t n = sol.states.cols() / 2;
    Trajectory traj;
    traj.dt = sol.dt;
    traj.times.resize(samples);
    traj.displacements = Matrix<double>(n, samples);
    traj.velocities = Matrix<double>(n, samples);
    for (std::size_t k = 0; k < samples; ++k) {
        traj.times[k] = static_cast<double>(k) * sol.dt;
        for (std::size_t i = 0; i < n; ++i) {
            traj.displacements(i, k) = sol.states(k, i);
            traj.velocities(i, k) = sol.states(k, n + i);
        }
    }
    return traj;
}

/// Simulates the oscillator chain from `x0` and samples it every `dt_out`.
inline Trajectory integrate(const ModelParams& params, const StateVector& x0, double t_end, double dt_out,
                            const IntegratorConfig& cfg = {}) {
    params.validate();
    if (x0.size() != params.state_size()) throw std::invalid_argument("integrate: initial state length != 2N");
    auto rhs = [&params](double t, std::span<const double> y, std::span<double> dydt) {
        equations_of_motion(t, y, params, dydt);
    };
    return to_trajectory(integrate_system(rhs, x0.values(), t_end, dt_out, cfg));
}

}  // namespace locnet
