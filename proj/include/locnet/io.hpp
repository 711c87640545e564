#pragma once

// CSV and JSON persistence for trajectories, networks and sweep results.
// Node numbers in every file are 1-based; IC indices are 0-based.

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "locnet/experiment.hpp"
#include "locnet/format.hpp"
#include "locnet/graph.hpp"
#include "locnet/integrator.hpp"
#include "locnet/netinfer.hpp"

namespace locnet {

using json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- CSV basics -------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        return std::nullopt;
    }
};

/// Numeric CSV with one header line. Errors name the line and column.
inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw FormatError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                              " fields, got " + std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = parse_double(cells[c]);
            if (!v)
                throw FormatError("csv line " + std::to_string(line_no) + " column '" + t.header[c] +
                                  "': not a number: '" + cells[c] + "'");
            row[c] = *v;
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw FormatError("csv: empty input");
    return t;
}

// --- trajectories ------------------------------------------------------------------

/// Columns t, x1..xN, v1..vN.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const std::size_t n = traj.n_osc();
    out << "t";
    for (std::size_t i = 0; i < n; ++i) out << ",x" << i + 1;
    for (std::size_t i = 0; i < n; ++i) out << ",v" << i + 1;
    out << "\n";
    for (std::size_t k = 0; k < traj.n_samples(); ++k) {
        out << format_double(traj.times[k]);
        for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(traj.displacements(i, k));
        for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(traj.velocities(i, k));
        out << "\n";
    }
}

/// Displacement series read from a CSV: one row per series.
struct SeriesTable {
    std::vector<std::string> names;
    Matrix<double> series;
};

/// Takes the x1..xN columns when present, otherwise every column except t.
inline SeriesTable read_series_csv(std::istream& in) {
    const CsvTable t = read_csv(in);
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (t.header[c].size() > 1 && t.header[c][0] == 'x') cols.push_back(c);
    if (cols.empty())
        for (std::size_t c = 0; c < t.header.size(); ++c)
            if (t.header[c] != "t") cols.push_back(c);
    if (cols.size() < 2) throw FormatError("series csv: need at least 2 series columns");
    if (t.rows.size() < 2) throw FormatError("series csv: need at least 2 samples");
    SeriesTable s;
    s.series = Matrix<double>(cols.size(), t.rows.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
        s.names.push_back(t.header[cols[i]]);
        for (std::size_t k = 0; k < t.rows.size(); ++k) s.series(i, k) = t.rows[k][cols[i]];
    }
    return s;
}

// --- networks ----------------------------------------------------------------------

inline json partition_json(const SCCPartition& p) {
    json comps = json::array();
    for (const auto& c : p.components) {
        json members = json::array();
        for (std::size_t node : c) members.push_back(node + 1);
        comps.push_back(std::move(members));
    }
    return comps;
}

inline json network_json(const FunctionalNetwork& net) {
    json j;
    json nodes = json::array();
    for (std::size_t i = 0; i < net.node_count(); ++i) nodes.push_back(i + 1);
    json edges = json::array();
    for (const auto& [a, b] : net.edges()) edges.push_back({a + 1, b + 1});
    json deg = json::array();
    for (std::size_t z : in_degrees(net)) deg.push_back(z);
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    j["in_degrees"] = std::move(deg);
    j["scc"] = partition_json(strongly_connected_components(net));
    return j;
}

/// One "i j" line per directed edge.
inline void write_edge_list(std::ostream& out, const FunctionalNetwork& net) {
    for (const auto& [a, b] : net.edges()) out << a + 1 << ' ' << b + 1 << "\n";
}

inline void write_pair_table(std::ostream& out, const std::vector<PairDiagnostics>& pairs) {
    out << "i,j,epsilon,t_ij,t_ji,delta,c_ij,c_ji,direction,degenerate\n";
    for (const auto& p : pairs)
        out << p.i + 1 << ',' << p.j + 1 << ',' << format_double(p.epsilon) << ',' << format_double(p.transitivity_ij)
            << ',' << format_double(p.transitivity_ji) << ',' << format_double(p.delta) << ','
            << format_double(p.clustering_ij) << ',' << format_double(p.clustering_ji) << ',' << to_string(p.direction)
            << ',' << (p.degenerate_triples ? 1 : 0) << "\n";
}

// --- sweep results -------------------------------------------------------------------

/// m4, ic_index, node, in_degree for every successful cell.
inline void write_degrees_csv(std::ostream& out, const SweepResult& s) {
    out << "m4,ic_index,node,in_degree\n";
    for (std::size_t v = 0; v < s.sweep_values.size(); ++v) {
        const std::string m4 = format_double(s.sweep_values[v]);
        for (std::size_t ic = 0; ic < s.cells[v].size(); ++ic) {
            const auto& c = s.cells[v][ic];
            if (!c.result) continue;
            for (std::size_t i = 0; i < s.n_osc; ++i)
                out << m4 << ',' << ic << ',' << i + 1 << ',' << c.result->in_degrees[i] << "\n";
        }
    }
}

inline void write_stats_csv(std::ostream& out, const SweepResult& s) {
    out << "m4,node,mean,std\n";
    for (std::size_t v = 0; v < s.sweep_values.size(); ++v)
        for (std::size_t i = 0; i < s.n_osc; ++i)
            out << format_double(s.sweep_values[v]) << ',' << i + 1 << ',' << format_double(s.stats[v].mean[i]) << ','
                << format_double(s.stats[v].std[i]) << "\n";
}

/// Per-value statistics recovered from stats.csv.
struct StatsTable {
    std::vector<double> sweep_values;  // in file order
    std::size_t n_osc = 0;
    std::vector<std::vector<double>> mean;  // [value][node]
    std::vector<std::vector<double>> std;
};

inline StatsTable read_stats_csv(std::istream& in) {
    const CsvTable t = read_csv(in);
    const auto cm4 = t.column("m4"), cnode = t.column("node"), cmean = t.column("mean"), cstd = t.column("std");
    if (!cm4 || !cnode || !cmean || !cstd) throw FormatError("stats csv: expected columns m4,node,mean,std");
    StatsTable s;
    for (const auto& row : t.rows) {
        const double m4 = row[*cm4];
        if (s.sweep_values.empty() || s.sweep_values.back() != m4) {
            s.sweep_values.push_back(m4);
            s.mean.emplace_back();
            s.std.emplace_back();
        }
        const auto node = static_cast<std::size_t>(row[*cnode]);
        if (node != s.mean.back().size() + 1) throw FormatError("stats csv: nodes out of order at m4 = " + format_double(m4));
        s.mean.back().push_back(row[*cmean]);
        s.std.back().push_back(row[*cstd]);
    }
    if (s.mean.empty()) throw FormatError("stats csv: no rows");
    s.n_osc = s.mean.front().size();
    for (const auto& m : s.mean)
        if (m.size() != s.n_osc) throw FormatError("stats csv: inconsistent node count");
    return s;
}

/// Partitions per sweep value for the reference IC and for every ensemble IC.
inline json scc_json(const SweepResult& s) {
    json j;
    j["sweep_values"] = s.sweep_values;
    json ref = json::array();
    for (const auto& c : s.reference) ref.push_back(c.result ? partition_json(c.result->scc) : json(nullptr));
    j["reference"] = std::move(ref);
    json ens = json::array();
    for (const auto& row : s.cells) {
        json per_value = json::array();
        for (const auto& c : row) per_value.push_back(c.result ? partition_json(c.result->scc) : json(nullptr));
        ens.push_back(std::move(per_value));
    }
    j["ensemble"] = std::move(ens);
    return j;
}

/// Reference-IC component index of every node per sweep value, as read back
/// from scc.json. Missing cells hold std::nullopt.
struct SccTraceTable {
    std::vector<double> sweep_values;
    std::size_t n_osc = 0;
    std::vector<std::optional<std::vector<std::size_t>>> component_of;
};

inline SccTraceTable read_scc_trace(const json& j) {
    SccTraceTable t;
    try {
        t.sweep_values = j.at("sweep_values").get<std::vector<double>>();
        const json& ref = j.at("reference");
        if (ref.size() != t.sweep_values.size()) throw FormatError("scc json: reference length mismatch");
        for (const auto& part : ref) {
            if (part.is_null()) {
                t.component_of.emplace_back();
                continue;
            }
            std::size_t n = 0;
            for (const auto& comp : part) n += comp.size();
            std::vector<std::size_t> of(n, 0);
            for (std::size_t c = 0; c < part.size(); ++c)
                for (const auto& node : part[c]) {
                    const auto k = node.get<std::size_t>();
                    if (k < 1 || k > n) throw FormatError("scc json: node number out of range");
                    of[k - 1] = c;
                }
            t.n_osc = std::max(t.n_osc, n);
            t.component_of.emplace_back(std::move(of));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("scc json: ") + e.what());
    }
    return t;
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json report_json(const SweepResult& s, const DetectionReport& r) {
    json j;
    j["node"] = r.node ? json(*r.node + 1) : json(nullptr);
    j["m4_mean_zero"] = optional_json(r.m4_mean_zero);
    j["m4_first_zero"] = optional_json(r.m4_first_zero);
    j["m4_scc_split"] = optional_json(r.m4_scc_split);
    j["m4_first_localized"] = optional_json(r.m4_first_localized);
    j["m4_always_localized"] = optional_json(r.m4_always_localized);
    json per_node = json::array();
    for (std::size_t i = 0; i < r.mean_zero_by_node.size(); ++i)
        per_node.push_back({{"node", i + 1},
                            {"mean_zero", optional_json(r.mean_zero_by_node[i])},
                            {"first_zero", optional_json(r.first_zero_by_node[i])},
                            {"scc_split", optional_json(r.scc_split_by_node[i])}});
    j["per_node"] = std::move(per_node);
    j["target_node"] = s.target_index + 1;
    j["ensemble_size"] = s.initial_conditions.size();
    j["sweep_count"] = s.sweep_values.size();
    j["failed_cells"] = s.failed_cells();
    std::ostringstream h;
    h << std::hex << s.ic_hash;
    j["ic_hash"] = h.str();
    std::size_t disagreements = 0;
    for (const auto& row : s.cells)
        for (const auto& c : row)
            if (c.result) disagreements += c.result->clustering_disagreements;
    j["clustering_disagreements"] = disagreements;
    return j;
}

}  // namespace locnet
