// Line-oriented "[section]" / "key = value" run configuration. Parsing is
// strict: unknown sections or keys are hard errors with line numbers, and
// constraint violations name the violated inequality. canonical_config
// echoes a config back in fixed order such that parsing the echo reproduces
// the config exactly.
#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dragflow/errors.hpp"
#include "dragflow/integrator.hpp"
#include "dragflow/kinetic.hpp"
#include "dragflow/model.hpp"

namespace dragflow {

struct RunConfig {
    // [grid]
    int dim = 1;
    std::vector<std::int64_t> n_points{128};
    std::vector<double> length{1.0};

    // [params]
    double gamma = 2.0;
    double mu = 0.1;
    double lambda = 0.0;
    double vacuum_floor = 1e-8;

    // [run]
    std::string formulation = "primitive";
    double t_end = 20.0;
    double cfl = 0.4;
    double viscous_safety = 0.25;
    double dt_max = 0.01;
    double cadence = 100.0;  // diagnostic samples per unit time
    std::uint64_t seed = 12345;

    // [initial]
    std::string family = "single_mode";
    double amplitude = 0.05;
    double velocity_amplitude = 0.05;  // defaults to amplitude when absent
    double ns_amplitude = 0.05;        // defaults to amplitude when absent
    double u_mean = 0.05;              // defaults to amplitude when absent
    std::vector<int> mode{1};
    std::vector<int> ns_mode{1};  // defaults to mode when absent
    int direction = 0;
    int k_max = 4;
    std::string snapshot_path;

    // [diagnostics]
    double sigma1 = 0.05;
    double sigma2 = 0.05;
    std::vector<double> sobolev_orders{0.0, 1.0, 2.0, 3.0};
    bool fit_window_auto = true;   // auto = [0.2 t_end, 0.8 t_end]
    double fit_t0 = 0.0;
    double fit_t1 = 0.0;
    bool gap_window_auto = true;   // auto = [0.025 t_end, 0.175 t_end]
    double gap_t0 = 0.0;
    double gap_t1 = 0.0;
    double min_r_squared = 0.99;

    // [kinetic]
    bool kinetic_enabled = false;
    std::int64_t particles = 100000;
    std::vector<double> eps_list{1.0, 0.3, 0.1, 0.03};
    std::int64_t kinetic_cells = 32;
    double kinetic_t_end = 1.5;
    double kinetic_dt = 4.8e-4;
    std::int64_t sample_every = 40;
    double kinetic_amplitude = 0.2;
    int kinetic_mode = 1;
    double kinetic_u_mean = 0.05;
    double kinetic_u_amplitude = 0.05;
    double variance_t_end = 1.0;

    // [output]
    std::string out_dir = "out";
    std::vector<double> snapshot_times;
    bool final_snapshot = true;

    bool operator==(const RunConfig& o) const = default;

    FluidParams fluid_params() const { return FluidParams::make(gamma, mu, lambda, vacuum_floor); }

    StepControl step_control() const {
        StepControl c;
        c.cfl = cfl;
        c.viscous_safety = viscous_safety;
        c.dt_max = dt_max;
        c.t_end = t_end;
        c.validate();
        return c;
    }

    Grid grid() const { return Grid::make(dim, n_points, length); }
};

namespace detail {

struct ConfigCursor {
    int line = 0;
    std::string section;
    std::string key;

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << "config line " << line << ": " << msg;
        throw ConfigError(os.str());
    }
};

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double to_double(const ConfigCursor& c, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        c.fail("expected a number for '" + c.key + "', got '" + v + "'");
    }
    if (used != v.size()) c.fail("trailing characters after number in '" + v + "'");
    return x;
}

inline std::int64_t to_int(const ConfigCursor& c, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        c.fail("expected an integer for '" + c.key + "', got '" + v + "'");
    }
    if (used != v.size()) c.fail("trailing characters after integer in '" + v + "'");
    return (std::int64_t)x;
}

inline std::uint64_t to_uint(const ConfigCursor& c, const std::string& v) {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &used);
    } catch (const std::exception&) {
        c.fail("expected a nonnegative integer for '" + c.key + "', got '" + v + "'");
    }
    if (used != v.size()) c.fail("trailing characters after integer in '" + v + "'");
    return (std::uint64_t)x;
}

inline bool to_bool(const ConfigCursor& c, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    c.fail("expected true/false for '" + c.key + "', got '" + v + "'");
}

inline std::vector<std::string> split_ws(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline std::vector<double> to_double_list(const ConfigCursor& c, const std::string& v) {
    std::vector<double> out;
    for (const std::string& t : split_ws(v)) out.push_back(to_double(c, t));
    return out;
}

inline std::vector<std::int64_t> to_int_list(const ConfigCursor& c, const std::string& v) {
    std::vector<std::int64_t> out;
    for (const std::string& t : split_ws(v)) out.push_back(to_int(c, t));
    return out;
}

inline std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    detail::ConfigCursor cur;
    bool saw_velocity_amplitude = false, saw_ns_amplitude = false, saw_u_mean = false,
         saw_ns_mode = false;

    std::istringstream is(text);
    std::string raw;
    while (std::getline(is, raw)) {
        ++cur.line;
        std::string line = raw;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') cur.fail("unterminated section header '" + line + "'");
            cur.section = detail::trim(line.substr(1, line.size() - 2));
            if (cur.section != "grid" && cur.section != "params" && cur.section != "run" &&
                cur.section != "initial" && cur.section != "diagnostics" &&
                cur.section != "kinetic" && cur.section != "output")
                cur.fail("unknown section [" + cur.section + "]");
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) cur.fail("expected 'key = value', got '" + line + "'");
        cur.key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (cur.key.empty()) cur.fail("empty key");
        if (cur.section.empty()) cur.fail("key '" + cur.key + "' appears before any [section]");

        const std::string& k = cur.key;
        if (cur.section == "grid") {
            if (k == "dim") cfg.dim = (int)detail::to_int(cur, value);
            else if (k == "n_points") cfg.n_points = detail::to_int_list(cur, value);
            else if (k == "length") cfg.length = detail::to_double_list(cur, value);
            else cur.fail("unknown key '" + k + "' in [grid]");
        } else if (cur.section == "params") {
            if (k == "gamma") cfg.gamma = detail::to_double(cur, value);
            else if (k == "mu") cfg.mu = detail::to_double(cur, value);
            else if (k == "lambda") cfg.lambda = detail::to_double(cur, value);
            else if (k == "vacuum_floor") cfg.vacuum_floor = detail::to_double(cur, value);
            else cur.fail("unknown key '" + k + "' in [params]");
        } else if (cur.section == "run") {
            if (k == "formulation") cfg.formulation = value;
            else if (k == "t_end") cfg.t_end = detail::to_double(cur, value);
            else if (k == "cfl") cfg.cfl = detail::to_double(cur, value);
            else if (k == "viscous_safety") cfg.viscous_safety = detail::to_double(cur, value);
            else if (k == "dt_max") cfg.dt_max = detail::to_double(cur, value);
            else if (k == "cadence") cfg.cadence = detail::to_double(cur, value);
            else if (k == "seed") cfg.seed = detail::to_uint(cur, value);
            else cur.fail("unknown key '" + k + "' in [run]");
        } else if (cur.section == "initial") {
            if (k == "family") cfg.family = value;
            else if (k == "amplitude") cfg.amplitude = detail::to_double(cur, value);
            else if (k == "velocity_amplitude") {
                cfg.velocity_amplitude = detail::to_double(cur, value);
                saw_velocity_amplitude = true;
            } else if (k == "ns_amplitude") {
                cfg.ns_amplitude = detail::to_double(cur, value);
                saw_ns_amplitude = true;
            } else if (k == "u_mean") {
                cfg.u_mean = detail::to_double(cur, value);
                saw_u_mean = true;
            } else if (k == "mode") {
                cfg.mode.clear();
                for (std::int64_t m : detail::to_int_list(cur, value)) cfg.mode.push_back((int)m);
            } else if (k == "ns_mode") {
                cfg.ns_mode.clear();
                for (std::int64_t m : detail::to_int_list(cur, value)) cfg.ns_mode.push_back((int)m);
                saw_ns_mode = true;
            } else if (k == "direction") cfg.direction = (int)detail::to_int(cur, value);
            else if (k == "k_max") cfg.k_max = (int)detail::to_int(cur, value);
            else if (k == "snapshot_path") cfg.snapshot_path = value;
            else cur.fail("unknown key '" + k + "' in [initial]");
        } else if (cur.section == "diagnostics") {
            if (k == "sigma1") cfg.sigma1 = detail::to_double(cur, value);
            else if (k == "sigma2") cfg.sigma2 = detail::to_double(cur, value);
            else if (k == "sobolev_orders") cfg.sobolev_orders = detail::to_double_list(cur, value);
            else if (k == "fit_window") {
                if (value == "auto") cfg.fit_window_auto = true;
                else {
                    const auto w = detail::to_double_list(cur, value);
                    if (w.size() != 2) cur.fail("fit_window needs 'auto' or two times");
                    cfg.fit_window_auto = false;
                    cfg.fit_t0 = w[0];
                    cfg.fit_t1 = w[1];
                }
            } else if (k == "gap_fit_window") {
                if (value == "auto") cfg.gap_window_auto = true;
                else {
                    const auto w = detail::to_double_list(cur, value);
                    if (w.size() != 2) cur.fail("gap_fit_window needs 'auto' or two times");
                    cfg.gap_window_auto = false;
                    cfg.gap_t0 = w[0];
                    cfg.gap_t1 = w[1];
                }
            } else if (k == "min_r_squared") cfg.min_r_squared = detail::to_double(cur, value);
            else cur.fail("unknown key '" + k + "' in [diagnostics]");
        } else if (cur.section == "kinetic") {
            if (k == "enabled") cfg.kinetic_enabled = detail::to_bool(cur, value);
            else if (k == "particles") cfg.particles = detail::to_int(cur, value);
            else if (k == "eps_list") cfg.eps_list = detail::to_double_list(cur, value);
            else if (k == "n_cells") cfg.kinetic_cells = detail::to_int(cur, value);
            else if (k == "t_end") cfg.kinetic_t_end = detail::to_double(cur, value);
            else if (k == "dt") cfg.kinetic_dt = detail::to_double(cur, value);
            else if (k == "sample_every") cfg.sample_every = detail::to_int(cur, value);
            else if (k == "amplitude") cfg.kinetic_amplitude = detail::to_double(cur, value);
            else if (k == "mode") cfg.kinetic_mode = (int)detail::to_int(cur, value);
            else if (k == "u_mean") cfg.kinetic_u_mean = detail::to_double(cur, value);
            else if (k == "u_amplitude") cfg.kinetic_u_amplitude = detail::to_double(cur, value);
            else if (k == "variance_t_end") cfg.variance_t_end = detail::to_double(cur, value);
            else cur.fail("unknown key '" + k + "' in [kinetic]");
        } else if (cur.section == "output") {
            if (k == "dir") cfg.out_dir = value;
            else if (k == "snapshot_times") cfg.snapshot_times = detail::to_double_list(cur, value);
            else if (k == "final_snapshot") cfg.final_snapshot = detail::to_bool(cur, value);
            else cur.fail("unknown key '" + k + "' in [output]");
        }
    }

    if (!saw_velocity_amplitude) cfg.velocity_amplitude = cfg.amplitude;
    if (!saw_ns_amplitude) cfg.ns_amplitude = cfg.amplitude;
    if (!saw_u_mean) cfg.u_mean = cfg.amplitude;
    if (!saw_ns_mode) cfg.ns_mode = cfg.mode;

    // structural validation; inequality checks live with the owning types
    if (cfg.dim < 1 || cfg.dim > 3) throw ConfigError("dim must be 1, 2, or 3");
    if (cfg.n_points.size() == 1 && cfg.dim > 1)
        cfg.n_points.assign((std::size_t)cfg.dim, cfg.n_points[0]);
    if (cfg.length.size() == 1 && cfg.dim > 1)
        cfg.length.assign((std::size_t)cfg.dim, cfg.length[0]);
    if ((int)cfg.mode.size() == 1 && cfg.dim > 1) cfg.mode.resize((std::size_t)cfg.dim, 0);
    if ((int)cfg.ns_mode.size() == 1 && cfg.dim > 1) cfg.ns_mode.resize((std::size_t)cfg.dim, 0);
    if ((int)cfg.mode.size() != cfg.dim) throw ConfigError("mode needs one entry per axis");
    if ((int)cfg.ns_mode.size() != cfg.dim) throw ConfigError("ns_mode needs one entry per axis");
    cfg.grid();          // validates n_points and length
    cfg.fluid_params();  // validates gamma > 1, mu > 0, lambda + 2mu > 0
    cfg.step_control();  // validates cfl, dt_max, t_end, viscous_safety
    if (cfg.formulation != "primitive" && cfg.formulation != "log_density")
        throw ConfigError("formulation must be 'primitive' or 'log_density'");
    if (!(cfg.cadence > 0.0)) throw ConfigError("cadence must be positive");
    if (cfg.family != "single_mode" && cfg.family != "random_smooth" && cfg.family != "snapshot")
        throw ConfigError("family must be single_mode, random_smooth, or snapshot");
    if (cfg.family == "snapshot" && cfg.snapshot_path.empty())
        throw ConfigError("family = snapshot requires snapshot_path");
    if (!(cfg.sigma1 >= 0.0 && cfg.sigma2 >= 0.0))
        throw ConfigError("sigma1 and sigma2 must be nonnegative");
    for (double s : cfg.sobolev_orders)
        if (!(s >= 0.0)) throw ConfigError("sobolev_orders must be nonnegative");
    if (!(cfg.min_r_squared > 0.0 && cfg.min_r_squared <= 1.0))
        throw ConfigError("min_r_squared must be in (0, 1]");
    if (!cfg.fit_window_auto && !(cfg.fit_t1 > cfg.fit_t0))
        throw ConfigError("fit_window must satisfy t0 < t1");
    if (!cfg.gap_window_auto && !(cfg.gap_t1 > cfg.gap_t0))
        throw ConfigError("gap_fit_window must satisfy t0 < t1");
    if (cfg.out_dir.empty()) throw ConfigError("output dir must not be empty");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

// Full echo in fixed section and key order; parsing the echo reproduces the
// config exactly.
inline std::string canonical_config(const RunConfig& c) {
    std::ostringstream os;
    os << "[grid]\n";
    os << "dim = " << c.dim << '\n';
    os << "n_points =";
    for (std::int64_t n : c.n_points) os << ' ' << n;
    os << '\n';
    os << "length =";
    for (double L : c.length) os << ' ' << detail::fmt_num(L);
    os << '\n';
    os << "\n[params]\n";
    os << "gamma = " << detail::fmt_num(c.gamma) << '\n';
    os << "mu = " << detail::fmt_num(c.mu) << '\n';
    os << "lambda = " << detail::fmt_num(c.lambda) << '\n';
    os << "vacuum_floor = " << detail::fmt_num(c.vacuum_floor) << '\n';
    os << "\n[run]\n";
    os << "formulation = " << c.formulation << '\n';
    os << "t_end = " << detail::fmt_num(c.t_end) << '\n';
    os << "cfl = " << detail::fmt_num(c.cfl) << '\n';
    os << "viscous_safety = " << detail::fmt_num(c.viscous_safety) << '\n';
    os << "dt_max = " << detail::fmt_num(c.dt_max) << '\n';
    os << "cadence = " << detail::fmt_num(c.cadence) << '\n';
    os << "seed = " << c.seed << '\n';
    os << "\n[initial]\n";
    os << "family = " << c.family << '\n';
    os << "amplitude = " << detail::fmt_num(c.amplitude) << '\n';
    os << "velocity_amplitude = " << detail::fmt_num(c.velocity_amplitude) << '\n';
    os << "ns_amplitude = " << detail::fmt_num(c.ns_amplitude) << '\n';
    os << "u_mean = " << detail::fmt_num(c.u_mean) << '\n';
    os << "mode =";
    for (int m : c.mode) os << ' ' << m;
    os << '\n';
    os << "ns_mode =";
    for (int m : c.ns_mode) os << ' ' << m;
    os << '\n';
    os << "direction = " << c.direction << '\n';
    os << "k_max = " << c.k_max << '\n';
    if (!c.snapshot_path.empty()) os << "snapshot_path = " << c.snapshot_path << '\n';
    os << "\n[diagnostics]\n";
    os << "sigma1 = " << detail::fmt_num(c.sigma1) << '\n';
    os << "sigma2 = " << detail::fmt_num(c.sigma2) << '\n';
    os << "sobolev_orders =";
    for (double s : c.sobolev_orders) os << ' ' << detail::fmt_num(s);
    os << '\n';
    if (c.fit_window_auto) os << "fit_window = auto\n";
    else os << "fit_window = " << detail::fmt_num(c.fit_t0) << ' ' << detail::fmt_num(c.fit_t1) << '\n';
    if (c.gap_window_auto) os << "gap_fit_window = auto\n";
    else os << "gap_fit_window = " << detail::fmt_num(c.gap_t0) << ' ' << detail::fmt_num(c.gap_t1) << '\n';
    os << "min_r_squared = " << detail::fmt_num(c.min_r_squared) << '\n';
    os << "\n[kinetic]\n";
    os << "enabled = " << (c.kinetic_enabled ? "true" : "false") << '\n';
    os << "particles = " << c.particles << '\n';
    os << "eps_list =";
    for (double e : c.eps_list) os << ' ' << detail::fmt_num(e);
    os << '\n';
    os << "n_cells = " << c.kinetic_cells << '\n';
    os << "t_end = " << detail::fmt_num(c.kinetic_t_end) << '\n';
    os << "dt = " << detail::fmt_num(c.kinetic_dt) << '\n';
    os << "sample_every = " << c.sample_every << '\n';
    os << "amplitude = " << detail::fmt_num(c.kinetic_amplitude) << '\n';
    os << "mode = " << c.kinetic_mode << '\n';
    os << "u_mean = " << detail::fmt_num(c.kinetic_u_mean) << '\n';
    os << "u_amplitude = " << detail::fmt_num(c.kinetic_u_amplitude) << '\n';
    os << "variance_t_end = " << detail::fmt_num(c.variance_t_end) << '\n';
    os << "\n[output]\n";
    os << "dir = " << c.out_dir << '\n';
    if (!c.snapshot_times.empty()) {
        os << "snapshot_times =";
        for (double t : c.snapshot_times) os << ' ' << detail::fmt_num(t);
        os << '\n';
    }
    os << "final_snapshot = " << (c.final_snapshot ? "true" : "false") << '\n';
    return os.str();
}

inline SweepConfig sweep_config(const RunConfig& c) {
    SweepConfig s;
    s.n_cells = c.kinetic_cells;
    s.length = c.length[0];
    s.particles = c.particles;
    s.eps_list = c.eps_list;
    s.seed = c.seed;
    s.t_end = c.kinetic_t_end;
    s.dt = c.kinetic_dt;
    s.sample_every = c.sample_every;
    s.amplitude = c.kinetic_amplitude;
    s.mode = c.kinetic_mode;
    s.u_mean = c.kinetic_u_mean;
    s.u_amplitude = c.kinetic_u_amplitude;
    s.gamma = c.gamma;
    s.mu = c.mu;
    s.lambda = c.lambda;
    s.variance_t_end = c.variance_t_end;
    return s;
}

}  // namespace dragflow
