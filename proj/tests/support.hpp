#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "larvae/control.hpp"
#include "larvae/dynamics.hpp"
#include "larvae/equilibrium.hpp"
#include "larvae/fixtures.hpp"
#include "larvae/scenario.hpp"

namespace support {

inline larvae::ScenarioConfig fixture(const std::string& name, int intervals = 0) {
    larvae::ScenarioConfig cfg = larvae::parse_scenario(larvae::fixture_text(name), name);
    if (intervals > 0) cfg = larvae::with_intervals(cfg, intervals);
    return cfg;
}

/// Constant-environment perturbed-start comparison scenario, built on the
/// compatibility constants where the transformed system and the transport
/// system agree in the continuum (zeta_F = zeta_M = zeta_I + Gamma* - P*).
inline std::string compare_scenario_json(int intervals, double horizon = 10.0) {
    std::ostringstream s;
    s << R"json({
  "schema": "larvae-scenario/1",
  "name": "compare",
  "age_grid": {"max_age": 4.0, "intervals": )json"
      << intervals << R"json(},
  "rates": {
    "mu_I": {"expr": "0.36*exp(0.5*a)"},
    "mu_F": {"expr": "0.36*exp(0.5*a)"},
    "mu_M": {"expr": "0.36*exp(0.5*a)"},
    "beta": {"expr": "3.68*exp(-0.5*a)"},
    "emergence": {"expr": "(-a^2+4*a)/16"},
    "sex_ratio": 0.5
  },
  "env": {
    "K": {"expr": "K_star"}, "Gamma": {"expr": "Gamma_star"}, "gamma": {"expr": "gamma_star"},
    "K_star": 28.619269720561, "Gamma_star": 2.0, "gamma_star": 1.0
  },
  "control": {"P_star": 0.307774536536, "variant": "stabilizing"},
  "initial": {"kind": "transformed", "eta0": 0.3},
  "horizon": )json"
      << horizon << "\n}\n";
    return s.str();
}

inline larvae::ScenarioConfig compare_scenario(int intervals, double horizon = 10.0) {
    return larvae::parse_scenario(compare_scenario_json(intervals, horizon), "compare");
}

/// Removes the neutral constant mode of the renewal pair exactly: measure the
/// discrete asymptote by running a copy forward, then subtract it (the update
/// is affine in the constant mode).
inline larvae::TransformedState center_history(larvae::TransformedState s,
                                               const larvae::SteadyState& steady,
                                               const larvae::ScenarioConfig& cfg,
                                               double warmup = 150.0) {
    larvae::Controller ctrl = larvae::Controller::static_law(cfg.P_star);
    larvae::TransformedState probe = s;
    const long steps = std::lround(warmup / cfg.grid.spacing());
    for (long k = 0; k < steps; ++k) larvae::step(probe, ctrl, steady, cfg);
    const double c_inf = probe.psi_I.at_lag(0);
    for (int j = 0; j < s.psi_I.size(); ++j) {
        s.psi_I.set_lag(j, s.psi_I.at_lag(j) - c_inf);
        s.psi_F.set_lag(j, s.psi_F.at_lag(j) - c_inf);
        s.psi_M.set_lag(j, s.psi_M.at_lag(j) - c_inf);
    }
    return s;
}

/// Tiny CSV reader for checking emitted files: skips '#' comments, returns
/// named columns.
struct Csv {
    std::vector<std::string> comments;
    std::vector<std::string> names;
    std::map<std::string, std::vector<double>> cols;
};

inline Csv read_csv(const std::string& path) {
    Csv out;
    std::ifstream in(path);
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            out.comments.push_back(line);
            continue;
        }
        std::vector<std::string> parts;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) parts.push_back(cell);
        if (!header_done) {
            out.names = parts;
            header_done = true;
            continue;
        }
        for (std::size_t i = 0; i < parts.size() && i < out.names.size(); ++i)
            out.cols[out.names[i]].push_back(std::stod(parts[i]));
    }
    return out;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace support
