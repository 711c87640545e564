// locnet command-line tool: simulate, network, sweep, report, validate.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "locnet/config.hpp"
#include "locnet/experiment.hpp"
#include "locnet/fixtures.hpp"
#include "locnet/io.hpp"
#include "locnet/manifest.hpp"
#include "locnet/svg.hpp"
#include "locnet/validation.hpp"

namespace fs = std::filesystem;
using namespace locnet;

namespace {

enum Exit : int { ok = 0, usage = 1, numerical = 2, validation_failed = 3 };

// Thrown for bad flag values so they exit like config errors.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> noise;
    std::optional<double> jitter;
    std::optional<double> t_end;
    std::string ic_range;
    std::string grid;
    std::optional<std::size_t> parallel;
    std::optional<std::size_t> ensemble;
    std::optional<double> tau;
    std::optional<double> rate;
    std::optional<std::size_t> embed_dim;
    std::optional<std::size_t> embed_delay;
    std::string metric;

    void add_experiment_flags(CLI::App* app) {
        app->add_option("--seed", seed, "random seed");
        app->add_option("--noise", noise, "measurement noise, fraction of each series' std");
        app->add_option("--jitter", jitter, "parameter jitter fraction");
        app->add_option("--t-end", t_end, "simulated duration in seconds");
        app->add_option("--ic-range", ic_range, "initial condition bounds low:high");
        app->add_option("--grid", grid, "sweep grid from:to:count");
        app->add_option("--parallel", parallel, "worker threads");
        app->add_option("--ensemble", ensemble, "initial conditions per sweep value");
    }

    void add_recurrence_flags(CLI::App* app) {
        app->add_option("--tau", tau, "direction tolerance");
        app->add_option("--rate", rate, "cross-recurrence rate");
        app->add_option("--embed-dim", embed_dim, "embedding dimension");
        app->add_option("--embed-delay", embed_delay, "embedding delay in samples");
        app->add_option("--metric", metric, "euclidean or supremum")->check(CLI::IsMember({"euclidean", "supremum"}));
    }

    [[nodiscard]] ExperimentConfig resolve() const {
        ExperimentConfig cfg = config.empty() ? default_experiment_config() : load_config(config);
        if (seed) cfg.seed = *seed;
        if (noise) cfg.noise_level = *noise;
        if (jitter) cfg.param_jitter = *jitter;
        if (t_end) cfg.t_end = *t_end;
        if (!ic_range.empty()) {
            const auto colon = ic_range.find(':');
            const auto lo = parse_double(std::string_view(ic_range).substr(0, colon));
            const auto hi = colon == std::string::npos ? std::nullopt
                                                       : parse_double(std::string_view(ic_range).substr(colon + 1));
            if (!lo || !hi) throw UsageError("--ic-range: expected low:high, got '" + ic_range + "'");
            cfg.ic_low = *lo;
            cfg.ic_high = *hi;
        }
        if (!grid.empty()) {
            const auto g = parse_grid(grid);
            if (!g) throw UsageError("--grid: expected from:to:count, got '" + grid + "'");
            cfg.sweep_values = *g;
        }
        if (parallel) cfg.threads = *parallel;
        if (ensemble) cfg.ensemble_size = *ensemble;
        if (tau) cfg.recurrence.direction_tol = *tau;
        if (rate) cfg.recurrence.recurrence_rate = *rate;
        if (embed_dim) cfg.recurrence.embed_dim = *embed_dim;
        if (embed_delay) cfg.recurrence.embed_delay = *embed_delay;
        if (!metric.empty()) cfg.recurrence.metric = metric == "supremum" ? Metric::supremum : Metric::euclidean;
        try {
            cfg.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return cfg;
    }
};

StateVector resolve_ic(const std::string& text, std::size_t n_osc) {
    std::optional<StateVector> x = fixtures::by_name(text);
    if (!x) {
        const auto list = parse_list(text);
        if (!list) throw UsageError("--ic: expected x0a, x0b, x0c or a comma-separated list");
        try {
            x = StateVector(*list);
        } catch (const std::exception& e) {
            throw UsageError(std::string("--ic: ") + e.what());
        }
    }
    if (x->n_osc() != n_osc)
        throw UsageError("--ic: " + std::to_string(x->size()) + " values for " + std::to_string(n_osc) + " oscillators");
    return *x;
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int k = 0; k < argc; ++k) s += (k ? " " : "") + std::string(argv[k]);
    return s;
}

std::string csv_of(const auto& writer) {
    std::ostringstream o;
    writer(o);
    return o.str();
}

int cmd_simulate(const Overrides& ov, const std::string& ic, std::optional<double> m4, const fs::path& out_dir,
                 const std::string& cmdline) {
    ExperimentConfig cfg = ov.resolve();
    ModelParams params = cfg.model;
    if (m4) params.masses[cfg.target_index] = *m4;
    const StateVector x0 = resolve_ic(ic, params.n_osc);
    Trajectory tr = integrate(params, x0, cfg.t_end, cfg.dt_out, cfg.integrator);
    if (cfg.noise_level > 0.0) {
        auto rng = make_stream(cfg.seed, StreamTag::noise);
        tr = add_noise(tr, cfg.noise_level, rng);
    }
    OutputSet out(out_dir, cmdline, to_config_text(cfg), cfg.seed);
    out.add("trajectory.csv", csv_of([&](std::ostream& o) { write_trajectory_csv(o, tr); }));
    out.finish();
    std::cout << "wrote " << (out_dir / "trajectory.csv").string() << " (" << tr.n_samples() << " samples, "
              << tr.n_osc() << " oscillators)\n";
    return ok;
}

int cmd_network(const Overrides& ov, const fs::path& input, const fs::path& out_dir, const std::string& cmdline) {
    const ExperimentConfig cfg = ov.resolve();
    std::ifstream in(input);
    if (!in) throw UsageError("cannot open '" + input.string() + "'");
    const SeriesTable table = read_series_csv(in);
    NetworkInference inf;
    try {
        inf = infer_network(table.series, cfg.recurrence);
    } catch (const DegenerateSeriesError& e) {
        std::cerr << "error: column '" << table.names.at(e.node()) << "' is constant; no direction can be inferred\n";
        return numerical;
    }
    const SCCPartition scc = strongly_connected_components(inf.network);
    OutputSet out(out_dir, cmdline, to_config_text(cfg), cfg.seed);
    out.add("network.json", network_json(inf.network).dump(2) + "\n");
    out.add("edges.txt", csv_of([&](std::ostream& o) { write_edge_list(o, inf.network); }));
    out.add("pairs.csv", csv_of([&](std::ostream& o) { write_pair_table(o, inf.pairs); }));
    out.finish();

    std::cout << "edges " << inf.network.edge_count() << ", SCCs " << scc.size() << "\nin-degrees";
    for (std::size_t z : in_degrees(inf.network)) std::cout << ' ' << z;
    std::cout << "\ncomponents " << partition_json(scc).dump() << "\n";
    if (const std::size_t d = inf.clustering_disagreements(); d > 0)
        std::cout << "cross-clustering disagrees with the decision on " << d << " pair(s)\n";
    return ok;
}

void render_charts(OutputSet& out, const StatsTable& stats, const SccTraceTable& trace) {
    out.add("degrees.svg", svg::degree_chart(stats));
    out.add("scc.svg", svg::scc_trace_chart(trace));
}

int cmd_sweep(const Overrides& ov, const std::string& ref_ic, const fs::path& out_dir, bool quiet,
              const std::string& cmdline) {
    ExperimentConfig cfg = ov.resolve();
    if (!ref_ic.empty()) cfg.reference_ic = ref_ic == "none" ? std::nullopt
                                                             : std::optional(resolve_ic(ref_ic, cfg.model.n_osc));
    const auto t0 = std::chrono::steady_clock::now();
    ProgressFn progress;
    if (!quiet)
        progress = [last = std::size_t{0}](std::size_t done, std::size_t total) mutable {
            const std::size_t pct = 100 * done / total;
            if (pct != last || done == total) {
                last = pct;
                std::fprintf(stderr, "\r%zu/%zu cells (%zu%%)", done, total, pct);
                if (done == total) std::fprintf(stderr, "\n");
            }
        };
    const SweepResult res = sweep(cfg, progress);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const DetectionReport rep = detect_onset(res);

    OutputSet out(out_dir, cmdline, to_config_text(cfg), cfg.seed);
    const std::string stats_csv = csv_of([&](std::ostream& o) { write_stats_csv(o, res); });
    const json scc = scc_json(res);
    out.add("degrees.csv", csv_of([&](std::ostream& o) { write_degrees_csv(o, res); }));
    out.add("stats.csv", stats_csv);
    out.add("scc.json", scc.dump() + "\n");
    out.add("report.json", report_json(res, rep).dump(2) + "\n");
    std::istringstream stats_in(stats_csv);
    render_charts(out, read_stats_csv(stats_in), read_scc_trace(scc));
    out.finish();

    const std::size_t cells = res.sweep_values.size() * res.initial_conditions.size();
    std::cout << report_json(res, rep).dump(2) << "\n"
              << cells << " ensemble cells in " << format_double(std::round(secs * 10) / 10) << " s\n";
    if (const std::size_t failed = res.failed_cells(); failed > 0) {
        std::cerr << "warning: " << failed << " of " << cells << " cells failed and were excluded from statistics\n";
        std::size_t shown = 0;
        for (std::size_t v = 0; v < res.cells.size() && shown < 5; ++v)
            for (std::size_t ic = 0; ic < res.cells[v].size() && shown < 5; ++ic)
                if (!res.cells[v][ic].result) {
                    std::cerr << "  m4 = " << format_double(res.sweep_values[v]) << ", ic " << ic << ": "
                              << res.cells[v][ic].error << "\n";
                    ++shown;
                }
        if (failed == cells) return numerical;
    }
    return ok;
}

int cmd_report(const fs::path& dir, const std::string& cmdline) {
    std::ifstream stats_in(dir / "stats.csv");
    if (!stats_in) throw UsageError("cannot open '" + (dir / "stats.csv").string() + "'");
    std::ifstream scc_in(dir / "scc.json");
    if (!scc_in) throw UsageError("cannot open '" + (dir / "scc.json").string() + "'");
    json scc;
    try {
        scc = json::parse(scc_in);
    } catch (const json::exception& e) {
        throw FormatError(std::string("scc.json: ") + e.what());
    }
    const StatsTable stats = read_stats_csv(stats_in);
    const SccTraceTable trace = read_scc_trace(scc);
    OutputSet out(dir / "charts", cmdline, "", 0);
    render_charts(out, stats, trace);
    out.finish();
    std::cout << "wrote " << (dir / "charts").string() << "/degrees.svg and scc.svg\n";
    return ok;
}

int cmd_validate(const Overrides& ov) {
    const ExperimentConfig cfg = ov.resolve();
    bool all = true;
    for (const auto& r : validation::run_all(cfg.recurrence)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        all = all && r.passed;
    }
    return all ? ok : validation_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional-network early warning of vibration localization in a ring of Duffing oscillators"};
    app.set_version_flag("--version", std::string(locnet::version));
    app.require_subcommand(1);
    const std::string cmdline = command_line(argc, argv);

    Overrides ov;
    std::string ic = "x0a", ref_ic, out_dir = "out";
    std::optional<double> m4;
    std::string input, report_dir;
    bool quiet = false;

    auto* sim = app.add_subcommand("simulate", "integrate one initial condition and write its trajectory");
    sim->add_option("--config", ov.config, "configuration file")->check(CLI::ExistingFile);
    sim->add_option("--ic", ic, "x0a, x0b, x0c or a comma-separated state vector");
    sim->add_option("--m4", m4, "mass of the target oscillator");
    sim->add_option("--out", out_dir, "output directory");
    ov.add_experiment_flags(sim);

    auto* net = app.add_subcommand("network", "infer the functional network of a trajectory CSV");
    net->add_option("--input", input, "trajectory CSV")->required()->check(CLI::ExistingFile);
    net->add_option("--config", ov.config, "configuration file")->check(CLI::ExistingFile);
    net->add_option("--out", out_dir, "output directory");
    ov.add_recurrence_flags(net);

    auto* swp = app.add_subcommand("sweep", "ensemble sweep of the target mass");
    swp->add_option("--config", ov.config, "configuration file")->check(CLI::ExistingFile);
    swp->add_option("--ic", ref_ic, "traced initial condition: x0a, x0b, x0c, none or a list");
    swp->add_option("--out", out_dir, "output directory");
    swp->add_flag("--quiet", quiet, "no progress output");
    ov.add_experiment_flags(swp);
    ov.add_recurrence_flags(swp);

    auto* rep = app.add_subcommand("report", "re-render charts from an existing sweep directory");
    rep->add_option("--dir", report_dir, "sweep output directory")->required()->check(CLI::ExistingDirectory);

    auto* val = app.add_subcommand("validate", "run the calibration fixtures");
    val->add_option("--config", ov.config, "configuration file")->check(CLI::ExistingFile);
    ov.add_recurrence_flags(val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*sim) return cmd_simulate(ov, ic, m4, out_dir, cmdline);
        if (*net) return cmd_network(ov, input, out_dir, cmdline);
        if (*swp) return cmd_sweep(ov, ref_ic, out_dir, quiet, cmdline);
        if (*rep) return cmd_report(report_dir, cmdline);
        if (*val) return cmd_validate(ov);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const IntegrationError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical;
    } catch (const DegenerateInputError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    return usage;
}
