#pragma once

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ferroflow/initial_data.hpp"
#include "ferroflow/params.hpp"
#include "ferroflow/stepper.hpp"

namespace ferroflow {

/**
 * One simulation configuration, parsed from a flat key = value text format
 * (one key per line, '#' comments, unknown keys are errors).
 */
struct RunConfig {
    Grid grid{48, 48};
    Params params;
    StepperConfig stepper;
    InitialData initial;
    std::string output_dir = "out";
    int snapshot_every = 100;     ///< steps between snapshots
    int diagnostics_every = 1;    ///< steps between diagnostics samples
    unsigned seed = 12345;
    double init_m_dev = -1.0;     ///< magnetization deviation; < 0 means sqrt(tau)

    [[nodiscard]] double m_deviation() const {
        if (init_m_dev >= 0.0) return init_m_dev;
        return params.tau ? std::sqrt(*params.tau) : 0.0;
    }
};

namespace detail {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace detail

/// Parses the key = value configuration text.  Reports the offending key and
/// line on every error; fills documented defaults for absent keys.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, std::string> kv;
    std::map<std::string, int> lines;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw detail::ConfigError("config line " + std::to_string(lineno) +
                                      ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw detail::ConfigError("config line " + std::to_string(lineno) +
                                      ": empty key or value");
        if (kv.count(key))
            throw detail::ConfigError("config line " + std::to_string(lineno) +
                                      ": duplicate key '" + key + "'");
        kv[key] = val;
        lines[key] = lineno;
    }

    auto where = [&](const std::string& key) {
        return "key '" + key + "' (line " + std::to_string(lines[key]) + ")";
    };
    auto take_double = [&](const std::string& key, double& out) {
        auto it = kv.find(key);
        if (it == kv.end()) return false;
        try {
            std::size_t pos = 0;
            out = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
        } catch (...) {
            throw detail::ConfigError(where(key) + ": expected a number, got '" + it->second + "'");
        }
        kv.erase(it);
        return true;
    };
    auto take_int = [&](const std::string& key, int& out) {
        auto it = kv.find(key);
        if (it == kv.end()) return false;
        try {
            std::size_t pos = 0;
            out = std::stoi(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
        } catch (...) {
            throw detail::ConfigError(where(key) + ": expected an integer, got '" + it->second +
                                      "'");
        }
        kv.erase(it);
        return true;
    };
    auto take_string = [&](const std::string& key, std::string& out) {
        auto it = kv.find(key);
        if (it == kv.end()) return false;
        out = it->second;
        kv.erase(it);
        return true;
    };

    int nx = 48, ny = 48;
    double lx = 1.0, ly = 1.0;
    take_int("nx", nx);
    take_int("ny", ny);
    take_double("lx", lx);
    take_double("ly", ly);
    try {
        cfg.grid = Grid(nx, ny, lx, ly);
    } catch (const std::exception& e) {
        throw detail::ConfigError(std::string("grid: ") + e.what());
    }

    std::string mode_str = "full";
    take_string("mode", mode_str);
    if (mode_str == "full")
        cfg.params.mode = SystemMode::Full;
    else if (mode_str == "regularized")
        cfg.params.mode = SystemMode::Regularized;
    else if (mode_str == "limit")
        cfg.params.mode = SystemMode::Limit;
    else
        throw detail::ConfigError(where("mode") + ": expected full|regularized|limit, got '" +
                                  mode_str + "'");

    take_double("nu", cfg.params.nu);
    take_double("nu_r", cfg.params.nu_r);
    take_double("c1", cfg.params.c1);
    take_double("c2", cfg.params.c2);
    take_double("mu0", cfg.params.mu0);
    take_double("kappa0", cfg.params.kappa0);
    double tau = 0.0;
    if (take_double("tau", tau)) cfg.params.tau = tau;
    take_double("sigma", cfg.params.sigma);
    take_double("t_end", cfg.params.t_end);
    take_double("dt", cfg.params.dt);

    AppliedField& ha = cfg.params.applied_field;
    take_double("ha_cx", ha.cx);
    take_double("ha_cy", ha.cy);
    take_double("ha_g2a", ha.g2a);
    take_double("ha_g2b", ha.g2b);
    take_double("ha_g3a", ha.g3a);
    take_double("ha_g3b", ha.g3b);
    take_double("ha_ramp", ha.ramp_rate);
    ha.x0 = 0.5 * cfg.grid.lx;
    ha.y0 = 0.5 * cfg.grid.ly;

    take_double("cfl_number", cfg.stepper.cfl_number);
    take_double("picard_tol", cfg.stepper.picard_tol);
    take_int("picard_max_iter", cfg.stepper.picard_max_iter);
    take_int("anderson_depth", cfg.stepper.anderson_depth);
    take_double("projection_tol", cfg.stepper.projection_tol);
    take_double("poisson_tol", cfg.stepper.poisson_tol);
    std::string adv = "upwind";
    take_string("advection", adv);
    if (adv == "upwind")
        cfg.stepper.advection = AdvectionScheme::Upwind;
    else if (adv == "centered")
        cfg.stepper.advection = AdvectionScheme::Centered;
    else
        throw detail::ConfigError(where("advection") + ": expected upwind|centered, got '" + adv +
                                  "'");

    take_string("output_dir", cfg.output_dir);
    take_int("snapshot_every", cfg.snapshot_every);
    take_int("diagnostics_every", cfg.diagnostics_every);
    int seed = int(cfg.seed);
    if (take_int("seed", seed)) {
        if (seed < 0) throw detail::ConfigError(where("seed") + ": must be >= 0");
        cfg.seed = unsigned(seed);
    }
    take_double("init_psi_amp", cfg.initial.psi_amp);
    take_double("init_w_amp", cfg.initial.w_amp);
    take_double("init_m_dev", cfg.init_m_dev);
    cfg.initial.seed = cfg.seed;

    if (!kv.empty()) {
        const auto& first = *kv.begin();
        throw detail::ConfigError("unknown key '" + first.first + "' (line " +
                                  std::to_string(lines[first.first]) + ")");
    }

    try {
        validate_params(cfg.params);
        validate_stepper_config(cfg.stepper);
    } catch (const std::exception& e) {
        throw detail::ConfigError(e.what());
    }
    if (cfg.snapshot_every < 1) throw detail::ConfigError("snapshot_every must be >= 1");
    if (cfg.diagnostics_every < 1) throw detail::ConfigError("diagnostics_every must be >= 1");
    return cfg;
}

/// Serializes a RunConfig into the flat text format; parse(serialize(c)) == c.
inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "nx = " << cfg.grid.nx << "\nny = " << cfg.grid.ny << "\nlx = " << cfg.grid.lx
        << "\nly = " << cfg.grid.ly << "\n";
    out << "mode = " << to_string(cfg.params.mode) << "\n";
    out << "nu = " << cfg.params.nu << "\nnu_r = " << cfg.params.nu_r
        << "\nc1 = " << cfg.params.c1 << "\nc2 = " << cfg.params.c2
        << "\nmu0 = " << cfg.params.mu0 << "\nkappa0 = " << cfg.params.kappa0 << "\n";
    if (cfg.params.tau) out << "tau = " << *cfg.params.tau << "\n";
    out << "sigma = " << cfg.params.sigma << "\nt_end = " << cfg.params.t_end
        << "\ndt = " << cfg.params.dt << "\n";
    const AppliedField& ha = cfg.params.applied_field;
    out << "ha_cx = " << ha.cx << "\nha_cy = " << ha.cy << "\nha_g2a = " << ha.g2a
        << "\nha_g2b = " << ha.g2b << "\nha_g3a = " << ha.g3a << "\nha_g3b = " << ha.g3b
        << "\nha_ramp = " << ha.ramp_rate << "\n";
    out << "cfl_number = " << cfg.stepper.cfl_number << "\npicard_tol = " << cfg.stepper.picard_tol
        << "\npicard_max_iter = " << cfg.stepper.picard_max_iter
        << "\nanderson_depth = " << cfg.stepper.anderson_depth
        << "\nprojection_tol = " << cfg.stepper.projection_tol
        << "\npoisson_tol = " << cfg.stepper.poisson_tol << "\n";
    out << "advection = "
        << (cfg.stepper.advection == AdvectionScheme::Upwind ? "upwind" : "centered") << "\n";
    out << "output_dir = " << cfg.output_dir << "\nsnapshot_every = " << cfg.snapshot_every
        << "\ndiagnostics_every = " << cfg.diagnostics_every << "\nseed = " << cfg.seed << "\n";
    out << "init_psi_amp = " << cfg.initial.psi_amp << "\ninit_w_amp = " << cfg.initial.w_amp
        << "\ninit_m_dev = " << cfg.init_m_dev << "\n";
    return out.str();
}

}  // namespace ferroflow
