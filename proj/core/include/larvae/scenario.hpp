#pragma once

#include <optional>
#include <string>
#include <vector>

#include "larvae/age_grid.hpp"
#include "larvae/expression.hpp"

namespace larvae {

/// One age-dependent rate, given either as an expression of `a` or as node
/// samples on the scenario grid.
struct RateFunction {
    Expression expr;
    std::vector<double> values;  // node samples; used when expr is empty

    bool tabulated() const { return expr.empty(); }
    double eval_at(double a, const VarTable& extra = {}) const;
    std::vector<double> sample(const AgeGrid& grid, const VarTable& extra = {}) const;
};

/// Demographic rate bundle. The aquatic mortality may carry a multiplicative
/// density term mu_I(a,p) = mu_I0(a) * (1 + density_coupling * p); egg laying
/// may carry a male-pressure term beta(a,m) = beta0(a) * (1 + male_coupling * m).
/// Both couplings default to zero.
struct VitalRateSet {
    RateFunction mu_I0;
    RateFunction mu_F;
    RateFunction mu_M;
    RateFunction beta0;
    RateFunction emergence;       // w(a)
    RateFunction male_fertility;  // lambda(a), defaults to 1
    double sex_ratio = 0.5;
    double density_coupling = 0.0;  // c_p in mu_I(a,p)
    double male_coupling = 0.0;     // c_m in beta(a,m)
};

struct EnvSample {
    double K = 0.0;
    double Gamma = 0.0;
    double gamma = 0.0;
};

/// Time-varying environment K(t), Gamma(t), gamma(t) plus their nominal
/// means. Expressions may reference t, the horizon T, and the mean values
/// K_star / Gamma_star / gamma_star when those were supplied explicitly.
struct EnvironmentSignal {
    Expression K;
    Expression Gamma;
    Expression gamma;
    double K_star = 0.0;
    double Gamma_star = 0.0;
    double gamma_star = 0.0;
    double horizon = 0.0;  // bound as T in expressions
    bool stars_supplied = false;

    EnvSample at(double t) const;
};

struct InitialCondition {
    enum class Kind { Equilibrium, Transformed, ScaledEquilibrium, Densities };
    Kind kind = Kind::Equilibrium;

    // Transformed: log-amplitude plus lag histories (expressions of a).
    double eta0 = 0.0;
    Expression psi_I0;  // empty means identically zero
    Expression psi_F0;
    Expression psi_M0;

    // ScaledEquilibrium: densities = equilibrium profile * factor(a).
    Expression scale_I;
    Expression scale_F;
    Expression scale_M;

    // Densities: raw profiles.
    RateFunction I0;
    RateFunction F0;
    RateFunction M0;
};

struct ControlSection {
    enum class Variant { Static, Stabilizing, Tracking };
    Variant variant = Variant::Static;
    double alpha = 1.0;
    double P_min = 0.0;
    double P_max = 0.0;
    Expression reference;       // y_d(t); may reference y_star and T
    Expression reference_rate;  // optional closed-form derivative of y_d
};

struct OutputOptions {
    int stride = 1;  // CSV row every `stride` steps
};

struct ScenarioConfig {
    std::string name;
    std::string comment;
    AgeGrid grid;
    VitalRateSet rates;
    EnvironmentSignal env;
    double P_star = 0.0;
    double horizon = 0.0;
    InitialCondition initial;
    ControlSection control;
    OutputOptions output;
    std::vector<std::string> warnings;  // non-fatal hypothesis notes
};

/// Node samples of every rate, at fixed aquatic density p and male pressure m.
struct RateTable {
    std::vector<double> mu_I;
    std::vector<double> mu_F;
    std::vector<double> mu_M;
    std::vector<double> beta;
    std::vector<double> w;
    std::vector<double> lambda;
};

/// Parses and fully validates a scenario file (JSON). Runs the standing
/// hypothesis checks: environment positivity and boundedness over [0, T],
/// nonnegative bounded rates, sex ratio in (0,1). Deterministic: the same
/// file yields bitwise-identical tabulated arrays.
ScenarioConfig load_scenario(const std::string& path);

/// Same, but from an in-memory JSON document.
ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin = "<memory>");

/// Pointwise environment evaluation (total on t >= 0).
EnvSample env_at(const EnvironmentSignal& env, double t);

/// Tabulates all rates on the grid at aquatic density p and male pressure m.
/// Throws on NaN or negative samples.
RateTable sample_rates(const VitalRateSet& rates, const AgeGrid& grid, double p = 0.0,
                       double m = 0.0);

/// Copy of a scenario on a refined/coarsened grid. Requires expression-based
/// rates (tabulated arrays cannot be resampled).
ScenarioConfig with_intervals(const ScenarioConfig& cfg, int intervals);

}  // namespace larvae
