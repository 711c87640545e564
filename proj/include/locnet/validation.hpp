#pragma once

// Calibration fixtures: integrator against the closed-form damped oscillator,
// the master-slave direction fixture that pins the sign convention, and the
// symmetric ring that must form a single strongly connected component.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "locnet/experiment.hpp"
#include "locnet/fixtures.hpp"
#include "locnet/format.hpp"
#include "locnet/integrator.hpp"
#include "locnet/netinfer.hpp"

namespace locnet::validation {

struct FixtureResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// x(t) for x'' + 2 zeta w x' + w^2 x = 0 with x(0) = x0, x'(0) = v0, zeta < 1.
inline double damped_oscillator(double t, double x0, double v0, double w, double zeta) {
    const double wd = w * std::sqrt(1.0 - zeta * zeta);
    const double decay = std::exp(-zeta * w * t);
    return decay * (x0 * std::cos(wd * t) + (v0 + zeta * w * x0) / wd * std::sin(wd * t));
}

/// Largest relative error of the integrated damped linear oscillator
/// (m = 1, k1 = 0.5 under the doubled diagonal so w = 1, alpha = 0.1), measured
/// against the peak amplitude over 10 s.
inline double integrator_max_relative_error(const IntegratorConfig& cfg = {}) {
    ModelParams p = ModelParams::uniform(2);
    p.diagonal = StiffnessDiagonal::doubled;
    p.k_coupling = 0.0;
    p.k_lin.assign(2, 0.5);
    p.k_cubic.assign(2, 0.0);
    p.force_amp = 0.0;
    p.alpha = 0.1;
    const double x0 = 1.0, v0 = 0.0, w = 1.0, zeta = p.alpha / (2.0 * w);
    const Trajectory tr = integrate(p, StateVector({x0, 0.0, v0, 0.0}), 10.0, 0.05, cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.n_samples(); ++k) {
        const double exact = damped_oscillator(tr.times[k], x0, v0, w, zeta);
        worst = std::max(worst, std::abs(tr.displacements(0, k) - exact) / std::abs(x0));
    }
    return worst;
}

/// Forced Duffing master (row 0) driving an unforced Duffing slave (row 1)
/// through a one-way spring of stiffness `kd`.
inline Matrix<double> master_slave_series(std::span<const double> y0, double kd = 0.3, double t_end = 10.0,
                                          double dt = 0.05) {
    auto rhs = [kd](double t, std::span<const double> y, std::span<double> dy) {
        const double xm = y[0], xs = y[1], vm = y[2], vs = y[3];
        dy[0] = vm;
        dy[1] = vs;
        dy[2] = std::cos(2.0 * t) - 0.1 * vm - xm - 2.0 * xm * xm * xm;
        dy[3] = -0.1 * vs - xs - 2.0 * xs * xs * xs + kd * (xm - xs);
    };
    const DenseSolution sol = integrate_system(rhs, y0, t_end, dt);
    Matrix<double> out(2, sol.states.rows());
    for (std::size_t k = 0; k < sol.states.rows(); ++k) {
        out(0, k) = sol.states(k, 0);
        out(1, k) = sol.states(k, 1);
    }
    return out;
}

struct MasterSlaveSummary {
    std::vector<double> deltas;  // T^{master,slave} - T^{slave,master}, one per IC
    std::size_t positive = 0;
    std::size_t negative = 0;
};

inline MasterSlaveSummary master_slave_deltas(const RecurrenceConfig& cfg, std::size_t ics = 20,
                                              std::uint64_t seed = 7) {
    MasterSlaveSummary s;
    for (const StateVector& y0 : sample_initial_conditions(ics, 0.0, 0.1, 4, seed)) {
        const Matrix<double> x = master_slave_series(y0.values());
        const double d = infer_pair(x.row(0), x.row(1), cfg).delta;
        s.deltas.push_back(d);
        s.positive += d > 0.0 ? 1 : 0;
        s.negative += d < 0.0 ? 1 : 0;
    }
    return s;
}

inline FixtureResult check_integrator() {
    const double err = integrator_max_relative_error();
    return {"integrator-vs-analytic", err < 1e-6, "max relative error " + format_double(err)};
}

inline FixtureResult check_identical_pair(const RecurrenceConfig& cfg) {
    const Matrix<double> x = master_slave_series(std::vector<double>{0.05, 0.02, 0.0, 0.01});
    const PairDiagnostics d = infer_pair(x.row(0), x.row(0), cfg);
    return {"identical-series", d.delta == 0.0 && d.direction == CouplingDirection::bidirectional,
            "delta " + format_double(d.delta)};
}

/// Every IC must give the same strict sign of delta; with the decision rule
/// this makes the master the source of the inferred link.
inline FixtureResult check_master_slave(const RecurrenceConfig& cfg) {
    const MasterSlaveSummary s = master_slave_deltas(cfg);
    const bool consistent = s.positive == s.deltas.size() || s.negative == s.deltas.size();
    std::string detail = std::to_string(s.positive) + "/" + std::to_string(s.deltas.size()) + " positive deltas";
    if (consistent)
        detail += s.positive ? "; convention: delta > 0 gives i -> j (driver -> driven)"
                             : "; convention: delta < 0 for driver i (sign inverted)";
    return {"master-slave-direction", consistent && s.positive > 0, detail};
}

/// The uniform ring at the reference parameters must form one SCC for every
/// fixture initial condition.
inline FixtureResult check_symmetric_single_scc(const RecurrenceConfig& rc) {
    CaseOptions opt;
    opt.recurrence = rc;
    std::string detail;
    bool ok = true;
    for (std::string_view name : fixtures::names) {
        const CaseResult r = run_case(ModelParams::uniform(10), *fixtures::by_name(name), opt);
        ok = ok && r.scc.size() == 1;
        detail += std::string(detail.empty() ? "" : ", ") + std::string(name) + ": " + std::to_string(r.scc.size()) +
                  " SCC";
    }
    return {"symmetric-single-scc", ok, detail};
}

inline std::vector<FixtureResult> run_all(const RecurrenceConfig& rc) {
    return {check_integrator(), check_identical_pair(rc), check_master_slave(rc), check_symmetric_single_scc(rc)};
}

}  // namespace locnet::validation
