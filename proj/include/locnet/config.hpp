#pragma once

// Sectioned key = value configuration text for ExperimentConfig.
//
//   # comment
//   [model]
//   n_osc = 10
//   masses = 1            # one value for every oscillator, or a comma list
//   [experiment]
//   sweep = 1.0:0.8:100   # from:to:count
//   reference_ic = x0a    # fixture name or a comma list of 2N values

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "locnet/experiment.hpp"
#include "locnet/fixtures.hpp"
#include "locnet/format.hpp"

namespace locnet {

/// Parse or validation failure. `line` is 0 when the problem is not tied to
/// one line of the input.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::string key, const std::string& what)
        : std::runtime_error(compose(line, key, what)), line_(line), key_(std::move(key)) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    static std::string compose(std::size_t line, const std::string& key, const std::string& what) {
        std::string s = "config";
        if (line > 0) s += " line " + std::to_string(line);
        if (!key.empty()) s += " key '" + key + "'";
        return s + ": " + what;
    }

    std::size_t line_;
    std::string key_;
};

/// Defaults used by the command-line tool: the library defaults plus the x0a
/// fixture as the traced initial condition.
inline ExperimentConfig default_experiment_config() {
    ExperimentConfig cfg;
    cfg.reference_ic = fixtures::by_name("x0a");
    return cfg;
}

/// Parses "from:to:count" into an evenly spaced grid.
inline std::optional<std::vector<double>> parse_grid(std::string_view s) {
    const auto c1 = s.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : s.find(':', c1 + 1);
    if (c2 == std::string_view::npos) return std::nullopt;
    const auto from = parse_double(s.substr(0, c1));
    const auto to = parse_double(s.substr(c1 + 1, c2 - c1 - 1));
    const auto count = parse_uint(s.substr(c2 + 1));
    if (!from || !to || !count || *count < 1) return std::nullopt;
    return linear_grid(*from, *to, static_cast<std::size_t>(*count));
}

inline std::optional<std::vector<double>> parse_list(std::string_view s) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        const auto v = parse_double(s.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (!v) return std::nullopt;
        out.push_back(*v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

namespace detail {

struct Entry {
    std::string value;
    std::size_t line = 0;
    bool used = false;
};

class EntryTable {
public:
    void add(const std::string& key, std::string value, std::size_t line) {
        if (auto it = entries_.find(key); it != entries_.end())
            throw ConfigError(line, key, "duplicate key (first set on line " + std::to_string(it->second.line) + ")");
        entries_[key] = Entry{std::move(value), line, false};
    }

    Entry* find(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    void check_all_used() const {
        for (const auto& [key, e] : entries_)
            if (!e.used) throw ConfigError(e.line, key, "unknown key");
    }

private:
    std::map<std::string, Entry> entries_;
};

class Reader {
public:
    explicit Reader(EntryTable& t) : t_(t) {}

    void real(const std::string& key, double& out) {
        if (auto* e = t_.find(key)) {
            const auto v = parse_double(e->value);
            if (!v) throw ConfigError(e->line, key, "expected a number, got '" + e->value + "'");
            out = *v;
        }
    }

    void count(const std::string& key, std::size_t& out) {
        if (auto* e = t_.find(key)) {
            const auto v = parse_uint(e->value);
            if (!v) throw ConfigError(e->line, key, "expected a non-negative integer, got '" + e->value + "'");
            out = static_cast<std::size_t>(*v);
        }
    }

    void seed(const std::string& key, std::uint64_t& out) {
        if (auto* e = t_.find(key)) {
            const auto v = parse_uint(e->value);
            if (!v) throw ConfigError(e->line, key, "expected a non-negative integer, got '" + e->value + "'");
            out = *v;
        }
    }

    // A single value is broadcast to all `n` entries.
    void per_oscillator(const std::string& key, std::size_t n, std::vector<double>& out) {
        if (auto* e = t_.find(key)) {
            const auto v = parse_list(e->value);
            if (!v) throw ConfigError(e->line, key, "expected a number or a comma-separated list");
            if (v->size() == 1)
                out.assign(n, v->front());
            else if (v->size() == n)
                out = *v;
            else
                throw ConfigError(e->line, key,
                                  "expected 1 or " + std::to_string(n) + " values, got " + std::to_string(v->size()));
        } else if (out.size() != n) {
            out.assign(n, out.empty() ? 0.0 : out.front());
        }
    }

    template <typename Enum>
    void choice(const std::string& key, Enum& out, std::initializer_list<std::pair<std::string_view, Enum>> options) {
        if (auto* e = t_.find(key)) {
            const std::string_view v = trim(e->value);
            std::string allowed;
            for (const auto& [name, value] : options) {
                if (v == name) {
                    out = value;
                    return;
                }
                allowed += (allowed.empty() ? "" : ", ") + std::string(name);
            }
            throw ConfigError(e->line, key, "expected one of " + allowed + ", got '" + std::string(v) + "'");
        }
    }

    Entry* raw(const std::string& key) { return t_.find(key); }

private:
    EntryTable& t_;
};

inline std::string_view strip_comment(std::string_view line) {
    const auto hash = line.find_first_of("#;");
    return hash == std::string_view::npos ? line : line.substr(0, hash);
}

}  // namespace detail

/// Parses configuration text on top of `base`. Every key must belong to a
/// known section; unknown or duplicate keys are errors.
inline ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = default_experiment_config()) {
    static const std::map<std::string, std::vector<std::string>> known{
        {"model", {"n_osc", "masses", "alpha", "k_lin", "k_coupling", "k_cubic", "force_amp", "force_freq",
                   "stiffness_diagonal"}},
        {"integrator", {"rel_tol", "abs_tol", "max_steps"}},
        {"recurrence", {"embed_dim", "embed_delay", "threshold_mode", "epsilon", "recurrence_rate", "metric",
                        "direction_tol"}},
        {"experiment", {"sweep", "sweep_values", "target_node", "ensemble_size", "ic_low", "ic_high", "seed", "t_end",
                        "dt_out", "noise_level", "param_jitter", "reference_ic", "threads"}},
        {"localization", {"window_fraction", "ratio"}},
    };

    detail::EntryTable table;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string_view line = trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!known.contains(section)) throw ConfigError(line_no, "", "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, std::string(line), "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (section.empty()) throw ConfigError(line_no, key, "key outside of any section");
        const auto& keys = known.at(section);
        const std::string full = section + "." + key;
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(line_no, full, "unknown key");
        if (value.empty()) throw ConfigError(line_no, full, "missing value");
        table.add(full, value, line_no);
    }

    ExperimentConfig cfg = std::move(base);
    detail::Reader rd(table);

    ModelParams& m = cfg.model;
    rd.count("model.n_osc", m.n_osc);
    rd.per_oscillator("model.masses", m.n_osc, m.masses);
    rd.real("model.alpha", m.alpha);
    rd.per_oscillator("model.k_lin", m.n_osc, m.k_lin);
    rd.real("model.k_coupling", m.k_coupling);
    rd.per_oscillator("model.k_cubic", m.n_osc, m.k_cubic);
    rd.real("model.force_amp", m.force_amp);
    rd.real("model.force_freq", m.force_freq);
    rd.choice("model.stiffness_diagonal", m.diagonal,
              {{"grounded", StiffnessDiagonal::grounded}, {"doubled", StiffnessDiagonal::doubled}});

    rd.real("integrator.rel_tol", cfg.integrator.rel_tol);
    rd.real("integrator.abs_tol", cfg.integrator.abs_tol);
    rd.count("integrator.max_steps", cfg.integrator.max_steps);

    RecurrenceConfig& r = cfg.recurrence;
    rd.count("recurrence.embed_dim", r.embed_dim);
    rd.count("recurrence.embed_delay", r.embed_delay);
    rd.choice("recurrence.threshold_mode", r.threshold_mode,
              {{"rate", ThresholdMode::fixed_recurrence_rate}, {"epsilon", ThresholdMode::fixed_epsilon}});
    rd.real("recurrence.epsilon", r.epsilon);
    rd.real("recurrence.recurrence_rate", r.recurrence_rate);
    rd.choice("recurrence.metric", r.metric, {{"euclidean", Metric::euclidean}, {"supremum", Metric::supremum}});
    rd.real("recurrence.direction_tol", r.direction_tol);

    if (auto* e = rd.raw("experiment.sweep")) {
        const auto g = parse_grid(e->value);
        if (!g) throw ConfigError(e->line, "experiment.sweep", "expected from:to:count");
        cfg.sweep_values = *g;
    }
    if (auto* e = rd.raw("experiment.sweep_values")) {
        if (table.find("experiment.sweep"))
            throw ConfigError(e->line, "experiment.sweep_values", "conflicts with experiment.sweep");
        const auto v = parse_list(e->value);
        if (!v) throw ConfigError(e->line, "experiment.sweep_values", "expected a comma-separated list");
        cfg.sweep_values = *v;
    }
    if (auto* e = rd.raw("experiment.target_node")) {
        const auto v = parse_uint(e->value);
        if (!v || *v < 1 || *v > m.n_osc)
            throw ConfigError(e->line, "experiment.target_node", "expected a node number in 1.." + std::to_string(m.n_osc));
        cfg.target_index = static_cast<std::size_t>(*v - 1);
    }
    rd.count("experiment.ensemble_size", cfg.ensemble_size);
    rd.real("experiment.ic_low", cfg.ic_low);
    rd.real("experiment.ic_high", cfg.ic_high);
    rd.seed("experiment.seed", cfg.seed);
    rd.real("experiment.t_end", cfg.t_end);
    rd.real("experiment.dt_out", cfg.dt_out);
    rd.real("experiment.noise_level", cfg.noise_level);
    rd.real("experiment.param_jitter", cfg.param_jitter);
    rd.count("experiment.threads", cfg.threads);
    if (auto* e = rd.raw("experiment.reference_ic")) {
        const std::string_view v = trim(e->value);
        if (v == "none") {
            cfg.reference_ic.reset();
        } else if (auto fx = fixtures::by_name(v)) {
            cfg.reference_ic = *fx;
        } else {
            const auto list = parse_list(v);
            if (!list) throw ConfigError(e->line, "experiment.reference_ic", "expected x0a, x0b, x0c, none or a list");
            try {
                cfg.reference_ic = StateVector(*list);
            } catch (const std::exception& ex) {
                throw ConfigError(e->line, "experiment.reference_ic", ex.what());
            }
        }
    }

    rd.real("localization.window_fraction", cfg.localization.window_fraction);
    rd.real("localization.ratio", cfg.localization.ratio);

    table.check_all_used();
    try {
        cfg.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(0, "", ex.what());
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = default_experiment_config()) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

namespace detail {
inline std::string join(std::span<const double> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s;
}
}  // namespace detail

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
inline std::string to_config_text(const ExperimentConfig& cfg) {
    std::ostringstream o;
    const ModelParams& m = cfg.model;
    o << "[model]\n"
      << "n_osc = " << m.n_osc << "\n"
      << "masses = " << detail::join(m.masses) << "\n"
      << "alpha = " << format_double(m.alpha) << "\n"
      << "k_lin = " << detail::join(m.k_lin) << "\n"
      << "k_coupling = " << format_double(m.k_coupling) << "\n"
      << "k_cubic = " << detail::join(m.k_cubic) << "\n"
      << "force_amp = " << format_double(m.force_amp) << "\n"
      << "force_freq = " << format_double(m.force_freq) << "\n"
      << "stiffness_diagonal = " << (m.diagonal == StiffnessDiagonal::grounded ? "grounded" : "doubled") << "\n\n";
    o << "[integrator]\n"
      << "rel_tol = " << format_double(cfg.integrator.rel_tol) << "\n"
      << "abs_tol = " << format_double(cfg.integrator.abs_tol) << "\n"
      << "max_steps = " << cfg.integrator.max_steps << "\n\n";
    const RecurrenceConfig& r = cfg.recurrence;
    o << "[recurrence]\n"
      << "embed_dim = " << r.embed_dim << "\n"
      << "embed_delay = " << r.embed_delay << "\n"
      << "threshold_mode = " << (r.threshold_mode == ThresholdMode::fixed_recurrence_rate ? "rate" : "epsilon") << "\n"
      << "epsilon = " << format_double(r.epsilon) << "\n"
      << "recurrence_rate = " << format_double(r.recurrence_rate) << "\n"
      << "metric = " << (r.metric == Metric::euclidean ? "euclidean" : "supremum") << "\n"
      << "direction_tol = " << format_double(r.direction_tol) << "\n\n";
    o << "[experiment]\n"
      << "sweep_values = " << detail::join(cfg.sweep_values) << "\n"
      << "target_node = " << cfg.target_index + 1 << "\n"
      << "ensemble_size = " << cfg.ensemble_size << "\n"
      << "ic_low = " << format_double(cfg.ic_low) << "\n"
      << "ic_high = " << format_double(cfg.ic_high) << "\n"
      << "seed = " << cfg.seed << "\n"
      << "t_end = " << format_double(cfg.t_end) << "\n"
      << "dt_out = " << format_double(cfg.dt_out) << "\n"
      << "noise_level = " << format_double(cfg.noise_level) << "\n"
      << "param_jitter = " << format_double(cfg.param_jitter) << "\n"
      << "reference_ic = " << (cfg.reference_ic ? detail::join(cfg.reference_ic->values()) : std::string("none"))
      << "\n"
      << "threads = " << cfg.threads << "\n\n";
    o << "[localization]\n"
      << "window_fraction = " << format_double(cfg.localization.window_fraction) << "\n"
      << "ratio = " << format_double(cfg.localization.ratio) << "\n";
    return o.str();
}

}  // namespace locnet
