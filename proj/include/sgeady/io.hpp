#pragma once

// Run configuration (flat key = value text, units in the key names) and
// deterministic file formats: one CSV snapshot per output time and a single
// time-series CSV per run.  Floats are written as shortest round-trip
// decimals, so identical states serialize to identical bytes.

#include "core.hpp"
#include "dynamics.hpp"
#include "initial_data.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace sgeady {

struct RunConfig {
    Domain domain{1e6, 0.0};  // H filled from the perturbation kind if absent
    PhysicalParams params;
    PerturbationKind kind = PerturbationKind::none;
    int seed_count = 0;
    double amplitude = 1.0;
    int lloyd_iters = 100;
    double eta = 0.01;             // percent
    double h_def = 30.0;           // seconds
    double final_time = 0.0;       // seconds
    double output_interval = 0.0;  // seconds; <= 0 keeps every accepted step
    std::uint64_t rng_seed = 0;
    std::string output_dir = "out";
    int max_halvings = 20;
    int max_newton_iters = 100;
    int max_backtracks = 40;
    double perturbation_scale = -1.0;  // metres; < 0 selects 1e-6 L
    bool write_polygons = false;

    DynamicsConfig dynamics() const {
        DynamicsConfig d;
        d.h_def = h_def;
        d.T = final_time;
        d.eta = eta;
        d.max_halvings = max_halvings;
        d.max_newton_iters = max_newton_iters;
        d.max_backtracks = max_backtracks;
        d.record_interval = output_interval;
        d.perturbation_scale = perturbation_scale;
        return d;
    }
};

inline double default_height(PerturbationKind kind) {
    switch (kind) {
        case PerturbationKind::unstable: return 10224.85;
        case PerturbationKind::stable: return 16374.56;
        default: return 1e4;
    }
}

inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ConfigError("cannot parse number: '" + s + "'");
    return v;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    bool have_height = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "domain_half_length_m") cfg.domain.L = parse_double(val);
        else if (key == "domain_height_m") { cfg.domain.H = parse_double(val); have_height = true; }
        else if (key == "coriolis_per_s") cfg.params.f = parse_double(val);
        else if (key == "gravity_m_per_s2") cfg.params.g = parse_double(val);
        else if (key == "theta0_k") cfg.params.theta0 = parse_double(val);
        else if (key == "buoyancy_per_s") cfg.params.N = parse_double(val);
        else if (key == "theta_gradient_k_per_m") cfg.params.s = parse_double(val);
        else if (key == "mode_amplitude_m_per_s") cfg.params.a = parse_double(val);
        else if (key == "cullen_amplitude_k") cfg.params.B = parse_double(val);
        else if (key == "perturbation") cfg.kind = perturbation_from_string(val);
        else if (key == "seed_count") cfg.seed_count = static_cast<int>(parse_double(val));
        else if (key == "amplitude_scale") cfg.amplitude = parse_double(val);
        else if (key == "lloyd_iterations") cfg.lloyd_iters = static_cast<int>(parse_double(val));
        else if (key == "mass_tolerance_percent") cfg.eta = parse_double(val);
        else if (key == "h_def_seconds") cfg.h_def = parse_double(val);
        else if (key == "final_time_seconds") cfg.final_time = parse_double(val);
        else if (key == "output_interval_seconds") cfg.output_interval = parse_double(val);
        else if (key == "rng_seed") cfg.rng_seed = static_cast<std::uint64_t>(parse_double(val));
        else if (key == "output_dir") cfg.output_dir = val;
        else if (key == "max_halvings") cfg.max_halvings = static_cast<int>(parse_double(val));
        else if (key == "max_newton_iterations") cfg.max_newton_iters = static_cast<int>(parse_double(val));
        else if (key == "max_backtracks") cfg.max_backtracks = static_cast<int>(parse_double(val));
        else if (key == "perturbation_scale_m") cfg.perturbation_scale = parse_double(val);
        else if (key == "write_polygons") cfg.write_polygons = (val == "true" || val == "1");
        else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!have_height) cfg.domain.H = default_height(cfg.kind);
    if (cfg.seed_count < 1) throw ConfigError("seed_count must be at least 1");
    cfg.domain.validate();
    cfg.params.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

// ---------------------------------------------------------------------------
// Snapshots: per-seed state at one time
// ---------------------------------------------------------------------------

struct Snapshot {
    double t = 0.0;
    std::vector<Vec2> seeds;      // unwrapped positions
    std::vector<double> weights;
    std::vector<double> masses;
    std::vector<Vec2> centroids;
};

inline void write_snapshot(const std::string& path, double t,
                           const std::vector<Vec2>& seeds,
                           const std::vector<double>& weights,
                           const LaguerreDiagram& dia, bool polygons = false) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write snapshot: " + path);
    out << "t,index,z1,z2,w,mass,centroid1,centroid2";
    if (polygons) out << ",polygon";
    out << "\n";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        out << format_double(t) << ',' << i << ',' << format_double(seeds[i].x) << ','
            << format_double(seeds[i].y) << ',' << format_double(weights[i]) << ','
            << format_double(dia.cells[i].area) << ','
            << format_double(dia.cells[i].centroid.x) << ','
            << format_double(dia.cells[i].centroid.y);
        if (polygons) {
            out << ',';
            for (std::size_t k = 0; k < dia.cells[i].poly.size(); ++k) {
                if (k) out << ' ';
                out << format_double(dia.cells[i].poly[k].x) << ':'
                    << format_double(dia.cells[i].poly[k].y);
            }
        }
        out << "\n";
    }
}

inline Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read snapshot: " + path);
    Snapshot snap;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty snapshot: " + path);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 8) throw Error("malformed snapshot row in " + path);
        snap.t = parse_double(fields[0]);
        snap.seeds.push_back({parse_double(fields[2]), parse_double(fields[3])});
        snap.weights.push_back(parse_double(fields[4]));
        snap.masses.push_back(parse_double(fields[5]));
        snap.centroids.push_back({parse_double(fields[6]), parse_double(fields[7])});
    }
    if (snap.seeds.empty()) throw Error("snapshot has no rows: " + path);
    return snap;
}

inline std::string snapshot_filename(double t) {
    return "snapshot_t" + format_double(t) + ".csv";
}

// ---------------------------------------------------------------------------
// Time series: one row per accepted step
// ---------------------------------------------------------------------------

struct SeriesRow {
    double t = 0.0;
    double rmsv = 0.0;
    double energy_total = 0.0;
    double energy_kinetic = 0.0;
    double energy_potential = 0.0;
    double eps_n = 0.0;
    double step_size = 0.0;
    int halvings = 0;
    int newton_iters = 0;
};

inline void write_series(const std::string& path, const std::vector<SeriesRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write series: " + path);
    out << "t,rmsv,energy_total,energy_kinetic,energy_potential,eps_n,step_size,halvings,"
           "newton_iters\n";
    for (const auto& r : rows) {
        out << format_double(r.t) << ',' << format_double(r.rmsv) << ','
            << format_double(r.energy_total) << ',' << format_double(r.energy_kinetic) << ','
            << format_double(r.energy_potential) << ',' << format_double(r.eps_n) << ','
            << format_double(r.step_size) << ',' << r.halvings << ',' << r.newton_iters
            << "\n";
    }
}

inline std::vector<SeriesRow> read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read series: " + path);
    std::vector<SeriesRow> rows;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty series: " + path);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 9) throw Error("malformed series row in " + path);
        SeriesRow r;
        r.t = parse_double(f[0]);
        r.rmsv = parse_double(f[1]);
        r.energy_total = parse_double(f[2]);
        r.energy_kinetic = parse_double(f[3]);
        r.energy_potential = parse_double(f[4]);
        r.eps_n = parse_double(f[5]);
        r.step_size = parse_double(f[6]);
        r.halvings = static_cast<int>(parse_double(f[7]));
        r.newton_iters = static_cast<int>(parse_double(f[8]));
        rows.push_back(r);
    }
    return rows;
}

} // namespace sgeady
