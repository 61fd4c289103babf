#include "larvae/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "larvae/errors.hpp"
#include "larvae/quadrature.hpp"

namespace larvae {

using nlohmann::json;

double RateFunction::eval_at(double a, const VarTable& extra) const {
    if (tabulated())
        throw ValidationError("tabulated rate cannot be evaluated off-grid");
    VarTable vars = extra;
    vars.set("a", a);
    return expr.eval(vars);
}

std::vector<double> RateFunction::sample(const AgeGrid& grid, const VarTable& extra) const {
    if (tabulated()) {
        if (static_cast<int>(values.size()) != grid.nodes())
            throw ValidationError("tabulated rate has " + std::to_string(values.size()) +
                                  " samples, grid has " + std::to_string(grid.nodes()) + " nodes");
        return values;
    }
    std::vector<double> out(grid.nodes());
    VarTable vars = extra;
    vars.set("A", grid.max_age);
    for (int j = 0; j < grid.nodes(); ++j) {
        vars.set("a", grid.node(j));
        out[j] = expr.eval(vars);
    }
    return out;
}

EnvSample EnvironmentSignal::at(double t) const {
    VarTable vars;
    vars.set("t", t);
    vars.set("T", horizon);
    if (stars_supplied) {
        vars.set("K_star", K_star);
        vars.set("Gamma_star", Gamma_star);
        vars.set("gamma_star", gamma_star);
    }
    EnvSample s;
    s.K = K.eval(vars);
    s.Gamma = Gamma.eval(vars);
    s.gamma = gamma.eval(vars);
    return s;
}

EnvSample env_at(const EnvironmentSignal& env, double t) { return env.at(t); }

RateTable sample_rates(const VitalRateSet& rates, const AgeGrid& grid, double p, double m) {
    RateTable tab;
    tab.mu_I = rates.mu_I0.sample(grid);
    for (double& v : tab.mu_I) v *= (1.0 + rates.density_coupling * p);
    tab.mu_F = rates.mu_F.sample(grid);
    tab.mu_M = rates.mu_M.sample(grid);
    tab.beta = rates.beta0.sample(grid);
    for (double& v : tab.beta) v *= (1.0 + rates.male_coupling * m);
    tab.w = rates.emergence.sample(grid);
    tab.lambda = rates.male_fertility.sample(grid);

    auto check = [&](const std::vector<double>& v, const char* name) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (!std::isfinite(v[j]))
                throw ValidationError(std::string("rate '") + name + "' is not finite at node " +
                                      std::to_string(j));
            if (v[j] < 0.0)
                throw ValidationError(std::string("rate '") + name + "' is negative at node " +
                                      std::to_string(j));
        }
    };
    check(tab.mu_I, "mu_I");
    check(tab.mu_F, "mu_F");
    check(tab.mu_M, "mu_M");
    check(tab.beta, "beta");
    check(tab.w, "emergence");
    check(tab.lambda, "male_fertility");
    return tab;
}

namespace {

Expression parse_expr_field(const json& node, const std::string& where) {
    if (node.is_number()) return Expression::constant(node.get<double>());
    if (node.is_object()) {
        if (node.contains("expr")) return Expression::parse(node.at("expr").get<std::string>());
        if (node.contains("value")) return Expression::constant(node.at("value").get<double>());
    }
    if (node.is_string()) return Expression::parse(node.get<std::string>());
    throw ValidationError(where + ": expected expression string, number, or {expr|value}");
}

RateFunction parse_rate(const json& node, const std::string& where) {
    RateFunction rf;
    if (node.is_object() && node.contains("values")) {
        rf.values = node.at("values").get<std::vector<double>>();
        return rf;
    }
    rf.expr = parse_expr_field(node, where);
    return rf;
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key))
        throw ValidationError(where + ": missing required key '" + key + "'");
    return obj.at(key);
}

/// Time average over [0, T] by trapezoid on the run grid.
double time_average(const Expression& f, double T, double dt) {
    const int n = std::max(2, static_cast<int>(std::llround(T / dt)) + 1);
    std::vector<double> samples(n);
    VarTable vars;
    vars.set("T", T);
    const double step = T / (n - 1);
    for (int k = 0; k < n; ++k) {
        vars.set("t", step * k);
        samples[k] = f.eval(vars);
    }
    return trapezoid(samples, step) / T;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(origin + ": JSON parse failure: " + e.what());
    }

    ScenarioConfig cfg;
    if (doc.contains("schema") && doc.at("schema").get<std::string>() != "larvae-scenario/1")
        throw ValidationError(origin + ": unsupported schema '" +
                              doc.at("schema").get<std::string>() + "'");
    cfg.name = doc.value("name", std::string("scenario"));
    cfg.comment = doc.value("comment", std::string());

    const json& jg = require(doc, "age_grid", origin);
    cfg.grid.max_age = require(jg, "max_age", "age_grid").get<double>();
    cfg.grid.intervals = require(jg, "intervals", "age_grid").get<int>();
    cfg.grid.validate();

    cfg.horizon = doc.value("horizon", 0.0);
    if (cfg.horizon < 0.0) throw ValidationError("horizon must be nonnegative");

    const json& jr = require(doc, "rates", origin);
    cfg.rates.mu_I0 = parse_rate(require(jr, "mu_I", "rates"), "rates.mu_I");
    cfg.rates.mu_F = parse_rate(require(jr, "mu_F", "rates"), "rates.mu_F");
    cfg.rates.mu_M = parse_rate(require(jr, "mu_M", "rates"), "rates.mu_M");
    cfg.rates.beta0 = parse_rate(require(jr, "beta", "rates"), "rates.beta");
    cfg.rates.emergence = parse_rate(require(jr, "emergence", "rates"), "rates.emergence");
    cfg.rates.male_fertility = jr.contains("male_fertility")
                                   ? parse_rate(jr.at("male_fertility"), "rates.male_fertility")
                                   : RateFunction{Expression::constant(1.0), {}};
    cfg.rates.sex_ratio = require(jr, "sex_ratio", "rates").get<double>();
    cfg.rates.density_coupling = jr.value("density_coupling", 0.0);
    cfg.rates.male_coupling = jr.value("male_coupling", 0.0);

    if (!(cfg.rates.sex_ratio > 0.0 && cfg.rates.sex_ratio < 1.0))
        throw ValidationError("sex ratio out of range: r must lie strictly in (0,1), got " +
                              std::to_string(cfg.rates.sex_ratio));

    const json& je = require(doc, "env", origin);
    cfg.env.K = parse_expr_field(require(je, "K", "env"), "env.K");
    cfg.env.Gamma = parse_expr_field(require(je, "Gamma", "env"), "env.Gamma");
    cfg.env.gamma = parse_expr_field(require(je, "gamma", "env"), "env.gamma");
    cfg.env.horizon = cfg.horizon;
    cfg.env.stars_supplied =
        je.contains("K_star") && je.contains("Gamma_star") && je.contains("gamma_star");
    if (cfg.env.stars_supplied) {
        cfg.env.K_star = je.at("K_star").get<double>();
        cfg.env.Gamma_star = je.at("Gamma_star").get<double>();
        cfg.env.gamma_star = je.at("gamma_star").get<double>();
    } else {
        // Nominal means replace the time-dependent signals in the autonomous
        // analysis; when not supplied, use time averages over the horizon.
        if (cfg.horizon <= 0.0)
            throw ValidationError(
                "env: *_star values are required when the horizon is zero "
                "(no interval to average over)");
        const double dt = cfg.grid.spacing();
        cfg.env.K_star = time_average(cfg.env.K, cfg.horizon, dt);
        cfg.env.Gamma_star = time_average(cfg.env.Gamma, cfg.horizon, dt);
        cfg.env.gamma_star = time_average(cfg.env.gamma, cfg.horizon, dt);
        cfg.env.stars_supplied = true;
        cfg.warnings.push_back("env means computed as time averages over [0, T]");
    }

    const json& jc = require(doc, "control", origin);
    cfg.P_star = require(jc, "P_star", "control").get<double>();
    const std::string variant = jc.value("variant", std::string("static"));
    if (variant == "static")
        cfg.control.variant = ControlSection::Variant::Static;
    else if (variant == "stabilizing")
        cfg.control.variant = ControlSection::Variant::Stabilizing;
    else if (variant == "tracking")
        cfg.control.variant = ControlSection::Variant::Tracking;
    else
        throw ValidationError("control.variant must be static|stabilizing|tracking");
    cfg.control.alpha = jc.value("alpha", 1.0);
    if (jc.contains("P_min")) cfg.control.P_min = jc.at("P_min").get<double>();
    if (jc.contains("P_max")) cfg.control.P_max = jc.at("P_max").get<double>();
    if (jc.contains("reference"))
        cfg.control.reference = parse_expr_field(jc.at("reference"), "control.reference");
    if (jc.contains("reference_rate"))
        cfg.control.reference_rate =
            parse_expr_field(jc.at("reference_rate"), "control.reference_rate");
    if (cfg.control.variant == ControlSection::Variant::Tracking) {
        if (cfg.control.reference.empty())
            throw ValidationError("tracking control requires control.reference");
        if (!(cfg.control.P_min < cfg.control.P_max))
            throw ValidationError("tracking control requires P_min < P_max");
        if (!(cfg.control.alpha > 0.0))
            throw ValidationError("tracking control requires alpha > 0");
    }
    if (!(cfg.P_star > 0.0)) throw ValidationError("control.P_star must be positive");

    if (doc.contains("initial")) {
        const json& ji = doc.at("initial");
        const std::string kind = ji.value("kind", std::string("equilibrium"));
        if (kind == "equilibrium") {
            cfg.initial.kind = InitialCondition::Kind::Equilibrium;
        } else if (kind == "transformed") {
            cfg.initial.kind = InitialCondition::Kind::Transformed;
            cfg.initial.eta0 = ji.value("eta0", 0.0);
            if (ji.contains("psi_I0"))
                cfg.initial.psi_I0 = parse_expr_field(ji.at("psi_I0"), "initial.psi_I0");
            if (ji.contains("psi_F0"))
                cfg.initial.psi_F0 = parse_expr_field(ji.at("psi_F0"), "initial.psi_F0");
            if (ji.contains("psi_M0"))
                cfg.initial.psi_M0 = parse_expr_field(ji.at("psi_M0"), "initial.psi_M0");
        } else if (kind == "scaled_equilibrium") {
            cfg.initial.kind = InitialCondition::Kind::ScaledEquilibrium;
            cfg.initial.scale_I = parse_expr_field(require(ji, "I", "initial"), "initial.I");
            cfg.initial.scale_F = parse_expr_field(require(ji, "F", "initial"), "initial.F");
            cfg.initial.scale_M = parse_expr_field(require(ji, "M", "initial"), "initial.M");
        } else if (kind == "densities") {
            cfg.initial.kind = InitialCondition::Kind::Densities;
            cfg.initial.I0 = parse_rate(require(ji, "I", "initial"), "initial.I");
            cfg.initial.F0 = parse_rate(require(ji, "F", "initial"), "initial.F");
            cfg.initial.M0 = parse_rate(require(ji, "M", "initial"), "initial.M");
        } else {
            throw ValidationError("initial.kind must be equilibrium|transformed|"
                                  "scaled_equilibrium|densities");
        }
    }

    if (doc.contains("output")) {
        cfg.output.stride = doc.at("output").value("stride", 1);
        if (cfg.output.stride < 1) throw ValidationError("output.stride must be >= 1");
    }

    // H1: Gamma, gamma >= 0 and K bounded away from zero on every sampled t.
    {
        const double dt = cfg.grid.spacing();
        const int steps = std::max(1, static_cast<int>(std::llround(cfg.horizon / dt)));
        for (int k = 0; k <= steps; ++k) {
            const double t = std::min(cfg.horizon, dt * k);
            const EnvSample s = cfg.env.at(t);
            if (!std::isfinite(s.K) || !std::isfinite(s.Gamma) || !std::isfinite(s.gamma))
                throw ValidationError("H1 violated: environment not finite at t = " +
                                      std::to_string(t));
            if (s.K <= 0.0)
                throw ValidationError("H1 violated: K(t) <= 0 at t = " + std::to_string(t));
            if (s.Gamma < 0.0 || s.gamma < 0.0)
                throw ValidationError("H1 violated: negative growth/competition at t = " +
                                      std::to_string(t));
            if (cfg.horizon <= 0.0) break;
        }
        if (cfg.env.K_star <= 0.0) throw ValidationError("H1 violated: K_star <= 0");
        if (cfg.env.Gamma_star < 0.0 || cfg.env.gamma_star < 0.0)
            throw ValidationError("H1 violated: negative nominal means");
    }

    // H2/H3: nonnegative rates, beta and w bounded; mortality integrable on
    // the grid. The divergence of the cumulative mortality at the maximum age
    // cannot be verified at grid resolution, so it is reported, not enforced.
    {
        RateTable tab = sample_rates(cfg.rates, cfg.grid);
        const double da = cfg.grid.spacing();
        const double int_mu = trapezoid(tab.mu_I, da);
        if (!std::isfinite(int_mu))
            throw ValidationError("H2 violated: aquatic mortality not integrable on the grid");
        cfg.warnings.push_back(
            "H2 note: cumulative mortality is finite at grid resolution; the "
            "divergence condition at max age is not verifiable numerically");
    }

    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

ScenarioConfig with_intervals(const ScenarioConfig& cfg, int intervals) {
    auto expr_based = [](const RateFunction& r) { return !r.tabulated(); };
    if (!expr_based(cfg.rates.mu_I0) || !expr_based(cfg.rates.mu_F) ||
        !expr_based(cfg.rates.mu_M) || !expr_based(cfg.rates.beta0) ||
        !expr_based(cfg.rates.emergence))
        throw ValidationError("grid refinement requires expression-based rates");
    ScenarioConfig out = cfg;
    out.grid.intervals = intervals;
    out.grid.validate();
    return out;
}

}  // namespace larvae
