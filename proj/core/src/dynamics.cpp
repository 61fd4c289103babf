#include "larvae/dynamics.hpp"

#include <cmath>

#include "larvae/diagnostics.hpp"
#include "larvae/errors.hpp"
#include "larvae/quadrature.hpp"

namespace larvae {

double LagBuffer::min_value() const {
    double m = data_.empty() ? 0.0 : data_[0];
    for (double v : data_) m = std::min(m, v);
    return m;
}

double LagBuffer::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

namespace {

constexpr double kOverflowGuard = 700.0;  // exp overflow threshold on eta

/// Trapezoid over lags of weight[j] * psi(t - a_j).
double lag_trapezoid(std::span<const double> weight, const LagBuffer& psi, double da) {
    const int n = static_cast<int>(weight.size());
    double s = 0.5 * (weight[0] * psi.at_lag(0) + weight[n - 1] * psi.at_lag(n - 1));
    for (int j = 1; j + 1 < n; ++j) s += weight[j] * psi.at_lag(j);
    return s * da;
}

/// Trapezoid over lags of weight[j] * (1 + psi(t - a_j)).
double lag_trapezoid_shifted(std::span<const double> weight, const LagBuffer& psi, double da) {
    const int n = static_cast<int>(weight.size());
    double s = 0.5 * (weight[0] * (1.0 + psi.at_lag(0)) +
                      weight[n - 1] * (1.0 + psi.at_lag(n - 1)));
    for (int j = 1; j + 1 < n; ++j) s += weight[j] * (1.0 + psi.at_lag(j));
    return s * da;
}

void check_state(const TransformedState& state, const Controller& controller) {
    if (!(state.eta < kOverflowGuard) || !std::isfinite(state.eta))
        throw NumericalError(std::string("divergence under controller '") + controller.name() +
                             "': amplitude exceeds the overflow guard");
    const double floor =
        std::min({state.psi_I.min_value(), state.psi_F.min_value(), state.psi_M.min_value()});
    if (!(1.0 + floor > 0.0))
        throw NumericalError(std::string("positivity lost under controller '") +
                             controller.name() + "': a lag history reached -1");
}

}  // namespace

TransformedState init_equilibrium(const SteadyState& steady, SimMode mode) {
    TransformedState s;
    s.mode = mode;
    s.eta = 0.0;
    s.t = 0.0;
    s.psi_I = LagBuffer(steady.grid.nodes());
    s.psi_F = LagBuffer(steady.grid.nodes());
    s.psi_M = LagBuffer(steady.grid.nodes());
    return s;
}

TransformedState init_from_density(const DensityField& field, const SteadyState& steady,
                                   SimMode mode, double y_d0) {
    const double da = steady.grid.spacing();
    const int n = steady.grid.nodes();

    const double num = trapezoid_product(steady.pi0_I, field.I, da);
    double den;
    if (mode == SimMode::Track) {
        std::vector<double> ref(n);
        for (int j = 0; j < n; ++j) ref[j] = steady.p_of_a[j] * y_d0;
        den = trapezoid_product(steady.pi0_I, ref, da);
    } else {
        den = trapezoid_product(steady.pi0_I, steady.I_star, da);
    }
    if (!(num > 0.0) || !(den > 0.0))
        throw ValidationError("invalid initial condition: nonpositive adjoint projection");
    const double proj = num / den;

    TransformedState s;
    s.mode = mode;
    s.eta = std::log(proj);
    s.t = field.t;
    s.psi_I = LagBuffer(n);
    s.psi_F = LagBuffer(n);
    s.psi_M = LagBuffer(n);
    const double ref_scale = mode == SimMode::Track ? y_d0 / steady.y_star : 1.0;
    for (int j = 0; j < n; ++j) {
        const double I_ref =
            mode == SimMode::Track ? steady.p_of_a[j] * y_d0 : steady.I_star[j];
        s.psi_I.set_lag(j, field.I[j] / (I_ref * proj) - 1.0);
        s.psi_F.set_lag(j, field.F[j] / (steady.F_star[j] * ref_scale * proj) - 1.0);
        s.psi_M.set_lag(j, field.M[j] / (steady.M_star[j] * ref_scale * proj) - 1.0);
    }
    return s;
}

DensityField reconstruct(const TransformedState& state, const SteadyState& steady,
                         double y_d_now) {
    const int n = steady.grid.nodes();
    DensityField f;
    f.t = state.t;
    f.I.resize(n);
    f.F.resize(n);
    f.M.resize(n);
    const double amp = std::exp(state.eta);
    const double ref_scale =
        state.mode == SimMode::Track ? y_d_now / steady.y_star : 1.0;
    for (int j = 0; j < n; ++j) {
        const double I_ref = state.mode == SimMode::Track ? steady.p_of_a[j] * y_d_now
                                                          : steady.I_star[j];
        f.I[j] = I_ref * (1.0 + state.psi_I.at_lag(j)) * amp;
        f.F[j] = steady.F_star[j] * ref_scale * (1.0 + state.psi_F.at_lag(j)) * amp;
        f.M[j] = steady.M_star[j] * ref_scale * (1.0 + state.psi_M.at_lag(j)) * amp;
    }
    return f;
}

double output_y_direct(const DensityField& field, const SteadyState& steady) {
    return trapezoid_product(steady.rates.w, field.I, steady.grid.spacing());
}

double output_y(const TransformedState& state, const SteadyState& steady, double y_d_now) {
    const double da = steady.grid.spacing();
    const double q = 1.0 + lag_trapezoid(steady.p_tilde, state.psi_I, da);
    const double scale = state.mode == SimMode::Track ? y_d_now : steady.y_star;
    return std::exp(state.eta) * scale * q;
}

ControlSample step(TransformedState& state, const Controller& controller,
                   const SteadyState& steady, const ScenarioConfig& cfg) {
    const double da = steady.grid.spacing();
    const double dt = da;  // lag alignment: one step shifts one age slot
    const double t0 = state.t;
    check_state(state, controller);

    auto history_integrals = [&](double* weighted, double* q) {
        *q = 1.0 + lag_trapezoid(steady.p_tilde, state.psi_I, da);
        if (state.mode == SimMode::Track)
            *weighted = steady.p_star + lag_trapezoid(steady.p_of_a, state.psi_I, da);
        else
            *weighted = lag_trapezoid_shifted(steady.I_star, state.psi_I, da);
    };

    double w_pre, q_pre;
    history_integrals(&w_pre, &q_pre);

    // Advance the lag histories first: the renewal subsystem is independent
    // of the amplitude, and the shifted buffers hold the exact delay data at
    // t + dt. The a = 0 quadrature endpoints couple the two unknown boundary
    // values, so solve the 2x2 system exactly.
    state.psi_I.advance(0.0);
    state.psi_F.advance(0.0);
    state.psi_M.advance(0.0);
    const double S_I = lag_trapezoid(steady.g_F, state.psi_F, da);
    const double S_F = lag_trapezoid(steady.g_I, state.psi_I, da);
    const double w0F = 0.5 * da * steady.g_F[0];
    const double w0I = 0.5 * da * steady.g_I[0];
    const double x_I = (S_I + w0F * S_F) / (1.0 - w0F * w0I);
    const double x_F = S_F + w0I * x_I;
    state.psi_I.set_lag(0, x_I);
    state.psi_F.set_lag(0, x_F);
    state.psi_M.set_lag(0, x_F);

    double w_post, q_post;
    history_integrals(&w_post, &q_post);

    ControlSample used{};
    bool sampled = false;

    // stage = 0, 1/2, 1 selects the delay data consistent with the stage time
    auto rhs = [&](double t, double eta, double stage) {
        const double weighted = (1.0 - stage) * w_pre + stage * w_post;
        const double q_psi = (1.0 - stage) * q_pre + stage * q_post;
        const EnvSample env_now = cfg.env.at(t);
        if (controller.variant() == ControllerVariant::Tracking) {
            const double y_d = controller.reference_value(t);
            const double y = std::exp(eta) * y_d * q_psi;
            const ControlSample cs = controller.sample(t, cfg.env, env_now, y);
            if (!sampled) {
                used = cs;
                sampled = true;
            }
            const double logistic =
                (env_now.Gamma * env_now.gamma / env_now.K) * std::exp(eta) * y_d * weighted;
            return steady.zeta_I - cs.P_total - controller.reference_rate(t) / y_d +
                   env_now.Gamma - logistic;
        }
        const double y = std::exp(eta) * steady.y_star * q_psi;
        const ControlSample cs = controller.sample(t, cfg.env, env_now, y);
        if (!sampled) {
            used = cs;
            sampled = true;
        }
        const double logistic =
            (env_now.Gamma * env_now.gamma / env_now.K) * std::exp(eta) * weighted;
        return steady.zeta_I - cs.P_total + env_now.Gamma - logistic;
    };

    const double k1 = rhs(t0, state.eta, 0.0);
    const double k2 = rhs(t0 + 0.5 * dt, state.eta + 0.5 * dt * k1, 0.5);
    const double k3 = rhs(t0 + 0.5 * dt, state.eta + 0.5 * dt * k2, 0.5);
    const double k4 = rhs(t0 + dt, state.eta + dt * k3, 1.0);
    state.eta += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    state.t = t0 + dt;
    check_state(state, controller);
    return used;
}

DensityField initial_density(const ScenarioConfig& cfg, const SteadyState& steady) {
    const int n = cfg.grid.nodes();
    DensityField f;
    f.t = 0.0;
    switch (cfg.initial.kind) {
        case InitialCondition::Kind::Equilibrium:
            f.I = steady.I_star;
            f.F = steady.F_star;
            f.M = steady.M_star;
            break;
        case InitialCondition::Kind::ScaledEquilibrium: {
            f.I.resize(n);
            f.F.resize(n);
            f.M.resize(n);
            VarTable vars;
            vars.set("A", cfg.grid.max_age);
            for (int j = 0; j < n; ++j) {
                vars.set("a", cfg.grid.node(j));
                f.I[j] = steady.I_star[j] * cfg.initial.scale_I.eval(vars);
                f.F[j] = steady.F_star[j] * cfg.initial.scale_F.eval(vars);
                f.M[j] = steady.M_star[j] * cfg.initial.scale_M.eval(vars);
            }
            break;
        }
        case InitialCondition::Kind::Densities:
            f.I = cfg.initial.I0.sample(cfg.grid);
            f.F = cfg.initial.F0.sample(cfg.grid);
            f.M = cfg.initial.M0.sample(cfg.grid);
            break;
        case InitialCondition::Kind::Transformed: {
            // Route through the transformed state and reconstruct.
            TransformedState s = initial_state(cfg, steady, SimMode::Stabilize);
            return reconstruct(s, steady);
        }
    }
    return f;
}

TransformedState initial_state(const ScenarioConfig& cfg, const SteadyState& steady,
                               SimMode mode) {
    const int n = cfg.grid.nodes();
    switch (cfg.initial.kind) {
        case InitialCondition::Kind::Equilibrium:
            return init_equilibrium(steady, mode);
        case InitialCondition::Kind::Transformed: {
            TransformedState s = init_equilibrium(steady, mode);
            s.eta = cfg.initial.eta0;
            VarTable vars;
            vars.set("A", cfg.grid.max_age);
            auto fill = [&](LagBuffer& buf, const Expression& e) {
                if (e.empty()) return;
                for (int j = 0; j < n; ++j) {
                    vars.set("a", cfg.grid.node(j));
                    buf.set_lag(j, e.eval(vars));
                }
            };
            fill(s.psi_I, cfg.initial.psi_I0);
            fill(s.psi_F, cfg.initial.psi_F0);
            fill(s.psi_M, cfg.initial.psi_M0);
            return s;
        }
        case InitialCondition::Kind::ScaledEquilibrium:
        case InitialCondition::Kind::Densities: {
            DensityField f = initial_density(cfg, steady);
            double y_d0 = 0.0;
            if (mode == SimMode::Track) {
                Reference ref = make_reference(cfg.control, steady.y_star, cfg.horizon,
                                               cfg.grid.spacing());
                y_d0 = ref.value(0.0);
            }
            return init_from_density(f, steady, mode, y_d0);
        }
    }
    throw ValidationError("unknown initial condition kind");
}

OutputSeries simulate(const ScenarioConfig& cfg, const SteadyState& steady,
                      const Controller& controller, const DiagnosticsOptions& diag) {
    const double da = cfg.grid.spacing();
    const double T = cfg.horizon;
    const long steps = std::lround(T / da);
    if (std::fabs(steps * da - T) > 1e-9 * std::max(1.0, T))
        throw ValidationError("horizon must be a whole number of steps (multiple of da)");

    const SimMode mode = controller.variant() == ControllerVariant::Tracking
                             ? SimMode::Track
                             : SimMode::Stabilize;
    TransformedState state = initial_state(cfg, steady, mode);

    OutputSeries out;
    out.track_mode = mode == SimMode::Track;
    out.has_diag = diag.enabled;
    out.sigma_I = diag.sigma_I;
    out.delta = diag.delta;
    out.gamma1 = diag.gamma1;
    out.max_age = cfg.grid.max_age;

    const int stride = std::max(1, cfg.output.stride);
    auto record = [&]() {
        out.t.push_back(state.t);
        out.eta.push_back(state.eta);
        const double y_d_now =
            out.track_mode ? controller.reference_value(state.t) : 0.0;
        const double y_now = output_y(state, steady, y_d_now);
        out.y.push_back(y_now);
        const ControlSample cs =
            controller.sample(state.t, cfg.env, cfg.env.at(state.t), y_now);
        out.P.push_back(cs.P_total);
        if (cs.P_total <= 0.0) ++out.nonpositive_P_samples;
        if (out.track_mode) {
            out.y_d.push_back(y_d_now);
            out.P_FF.push_back(cs.P_FF);
            out.P_FB_raw.push_back(cs.P_FB_raw);
            out.P_FB_sat.push_back(cs.P_FB_sat);
            out.saturated.push_back(cs.saturated ? 1 : 0);
        }
        if (diag.enabled) {
            out.V_I.push_back(lyapunov_VI(state.eta, steady.k_I).V_I);
            out.G_I.push_back(lag_decay_norm(state.psi_I, da, diag.sigma_I));
            const double Fpsi = lag_decay_norm_signed(state.psi_I, da, diag.sigma_I);
            out.F_psi.push_back(Fpsi);
            out.W.push_back(state.eta * state.eta + diag.delta * Fpsi);
            if (out.track_mode) {
                double sup = 0.0;
                for (int j = 0; j < state.psi_I.size(); ++j)
                    sup = std::max(sup, std::fabs(state.eta +
                                                  std::log1p(state.psi_I.at_lag(j))));
                out.ln_ratio_sup.push_back(sup);
            }
        }
    };

    record();  // initial sample at t = 0
    for (long k = 0; k < steps; ++k) {
        const ControlSample cs = step(state, controller, steady, cfg);
        ++out.total_steps;
        if (cs.saturated) ++out.saturated_steps;
        if ((k + 1) % stride == 0 || k + 1 == steps) record();
    }
    return out;
}

}  // namespace larvae
