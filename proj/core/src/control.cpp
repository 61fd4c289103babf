#include "larvae/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "larvae/errors.hpp"

namespace larvae {

const char* variant_name(ControllerVariant v) {
    switch (v) {
        case ControllerVariant::Static: return "static";
        case ControllerVariant::Stabilizing: return "stabilizing";
        case ControllerVariant::Tracking: return "tracking";
    }
    return "unknown";
}

double static_control(double P_star) { return P_star; }

double stabilizing_control(double P_star, double k_I, const EnvironmentSignal& env,
                           const EnvSample& now) {
    const double nominal_pressure = env.Gamma_star * env.gamma_star / env.K_star;
    const double current_pressure = now.Gamma * now.gamma / now.K;
    return P_star + (now.Gamma - env.Gamma_star) + k_I * (nominal_pressure - current_pressure);
}

double feedforward(double zeta_I, double p_star, const EnvSample& now, double y_d,
                   double y_d_rate) {
    if (!(y_d > 0.0))
        throw ValidationError("invalid reference: y_d(t) must stay positive");
    return zeta_I - y_d_rate / y_d + now.Gamma - p_star * (now.Gamma * now.gamma / now.K) * y_d;
}

double feedback(double y, double y_d, double alpha) {
    if (!(y > 0.0)) throw NumericalError("invalid state: nonpositive output y");
    if (!(y_d > 0.0)) throw ValidationError("invalid reference: nonpositive y_d");
    return alpha * std::log(y / y_d);
}

Saturation saturate(double P_FB_raw, double P_FF, double P_min, double P_max) {
    if (P_FF < P_min || P_FF > P_max)
        throw NumericalError("infeasible feedforward: P_FF leaves the hard control band");
    const double lo = P_min - P_FF;
    const double hi = P_max - P_FF;
    Saturation s;
    s.value = std::clamp(P_FB_raw, lo, hi);
    s.active = s.value != P_FB_raw;
    return s;
}

Reference make_reference(const ControlSection& control, double y_star, double horizon,
                         double fd_step) {
    if (control.reference.empty())
        throw ValidationError("tracking control requires a reference trajectory");
    const Expression value_expr = control.reference;
    auto bind = [value_expr, y_star, horizon](double t) {
        VarTable vars;
        vars.set("t", t);
        vars.set("T", horizon);
        vars.set("y_star", y_star);
        return value_expr.eval(vars);
    };
    Reference ref;
    ref.value = bind;
    if (!control.reference_rate.empty()) {
        const Expression rate_expr = control.reference_rate;
        ref.rate = [rate_expr, y_star, horizon](double t) {
            VarTable vars;
            vars.set("t", t);
            vars.set("T", horizon);
            vars.set("y_star", y_star);
            return rate_expr.eval(vars);
        };
    } else {
        const double h = fd_step;
        ref.rate = [bind, h](double t) { return (bind(t + h) - bind(t - h)) / (2.0 * h); };
    }
    return ref;
}

Controller Controller::static_law(double P_star) {
    Controller c;
    c.variant_ = ControllerVariant::Static;
    c.P_star_ = P_star;
    return c;
}

Controller Controller::stabilizing_law(double P_star, double k_I) {
    Controller c;
    c.variant_ = ControllerVariant::Stabilizing;
    c.P_star_ = P_star;
    c.k_I_ = k_I;
    return c;
}

Controller Controller::tracking_law(double zeta_I, double p_star, double alpha, double P_min,
                                    double P_max, Reference reference) {
    if (!(P_min < P_max)) throw ValidationError("tracking control requires P_min < P_max");
    if (!(alpha > 0.0)) throw ValidationError("tracking control requires alpha > 0");
    Controller c;
    c.variant_ = ControllerVariant::Tracking;
    c.zeta_I_ = zeta_I;
    c.p_star_ = p_star;
    c.alpha_ = alpha;
    c.P_min_ = P_min;
    c.P_max_ = P_max;
    c.reference_ = std::move(reference);
    return c;
}

ControlSample Controller::sample(double t, const EnvironmentSignal& env, const EnvSample& now,
                                 double y) const {
    ControlSample s;
    s.t = t;
    switch (variant_) {
        case ControllerVariant::Static:
            s.P_total = static_control(P_star_);
            break;
        case ControllerVariant::Stabilizing:
            s.P_total = stabilizing_control(P_star_, k_I_, env, now);
            break;
        case ControllerVariant::Tracking: {
            const double y_d = reference_.value(t);
            const double y_d_rate = reference_.rate(t);
            s.P_FF = feedforward(zeta_I_, p_star_, now, y_d, y_d_rate);
            s.P_FB_raw = feedback(y, y_d, alpha_);
            const Saturation sat = saturate(s.P_FB_raw, s.P_FF, P_min_, P_max_);
            s.P_FB_sat = sat.value;
            s.saturated = sat.active;
            s.P_total = s.P_FF + s.P_FB_sat;
            break;
        }
    }
    return s;
}

Controller make_controller(const ScenarioConfig& cfg, const SteadyState& steady,
                           std::optional<ControllerVariant> override_variant) {
    ControllerVariant v;
    if (override_variant) {
        v = *override_variant;
    } else {
        switch (cfg.control.variant) {
            case ControlSection::Variant::Static: v = ControllerVariant::Static; break;
            case ControlSection::Variant::Stabilizing: v = ControllerVariant::Stabilizing; break;
            case ControlSection::Variant::Tracking: v = ControllerVariant::Tracking; break;
            default: v = ControllerVariant::Static; break;
        }
    }
    switch (v) {
        case ControllerVariant::Static:
            return Controller::static_law(cfg.P_star);
        case ControllerVariant::Stabilizing:
            return Controller::stabilizing_law(cfg.P_star, steady.k_I);
        case ControllerVariant::Tracking: {
            Reference ref = make_reference(cfg.control, steady.y_star, cfg.horizon,
                                           cfg.grid.spacing());
            return Controller::tracking_law(steady.zeta_I, steady.p_star, cfg.control.alpha,
                                            cfg.control.P_min, cfg.control.P_max,
                                            std::move(ref));
        }
    }
    throw ValidationError("unknown controller variant");
}

AdmissibilityReport validate_reference(const ScenarioConfig& cfg, const SteadyState& steady,
                                       double alpha) {
    if (cfg.control.reference.empty())
        throw ValidationError("validate_reference requires a tracking scenario");
    AdmissibilityReport rep;
    const Reference ref =
        make_reference(cfg.control, steady.y_star, cfg.horizon, cfg.grid.spacing());
    const double p_star = steady.p_star;
    const double band = cfg.control.P_max - cfg.control.P_min;
    const double gain = std::min(2.0, alpha);
    rep.y_d_bound = gain / (4.0 * p_star) * std::min(1.0, 0.5 * band);

    const double dt = cfg.grid.spacing();
    const int steps = std::max(1, static_cast<int>(std::llround(cfg.horizon / dt)));
    rep.P_FF_min = std::numeric_limits<double>::infinity();
    rep.P_FF_max = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= steps; ++k) {
        const double t = std::min(cfg.horizon, dt * k);
        const double y_d = ref.value(t);
        rep.y_d_sup = std::max(rep.y_d_sup, y_d);
        if (!(y_d > 0.0 && y_d <= rep.y_d_bound)) {
            if (rep.pass) {
                rep.first_violation_t = t;
                rep.first_violation = "reference amplitude outside (0, bound]";
            }
            rep.amplitude_ok = false;
            rep.pass = false;
        }
        if (y_d > 0.0) {
            const double P_FF =
                feedforward(steady.zeta_I, p_star, cfg.env.at(t), y_d, ref.rate(t));
            rep.P_FF_min = std::min(rep.P_FF_min, P_FF);
            rep.P_FF_max = std::max(rep.P_FF_max, P_FF);
            const double margin = 4.0 * p_star / gain * y_d;
            if (!(P_FF >= cfg.control.P_min + margin && P_FF <= cfg.control.P_max - margin)) {
                if (rep.pass) {
                    rep.first_violation_t = t;
                    rep.first_violation = "feedforward leaves the admissible band";
                }
                rep.band_ok = false;
                rep.pass = false;
            }
        }
    }
    return rep;
}

TrackingConstants tracking_constants(const ScenarioConfig& cfg, const SteadyState& steady,
                                     double sigma) {
    TrackingConstants tc;
    tc.sigma = sigma;
    const Reference ref =
        make_reference(cfg.control, steady.y_star, cfg.horizon, cfg.grid.spacing());
    const double A = cfg.grid.max_age;
    const double alpha = cfg.control.alpha;

    // Band amplitudes after shifting by the feedforward, scanned over the run.
    const double dt = cfg.grid.spacing();
    const int steps = std::max(1, static_cast<int>(std::llround(cfg.horizon / dt)));
    double inf_lo = std::numeric_limits<double>::infinity();
    double inf_hi = std::numeric_limits<double>::infinity();
    double sup_amp = 0.0;
    double y_d_sup = 0.0;
    for (int k = 0; k <= steps; ++k) {
        const double t = std::min(cfg.horizon, dt * k);
        const double y_d = ref.value(t);
        y_d_sup = std::max(y_d_sup, y_d);
        const double P_FF =
            feedforward(steady.zeta_I, steady.p_star, cfg.env.at(t), y_d, ref.rate(t));
        const double lo_amp = std::fabs(cfg.control.P_min - P_FF);
        const double hi_amp = std::fabs(cfg.control.P_max - P_FF);
        inf_lo = std::min(inf_lo, lo_amp);
        inf_hi = std::min(inf_hi, hi_amp);
        sup_amp = std::max(sup_amp, std::max(lo_amp, hi_amp));
    }

    const double gain = std::min(2.0, alpha);
    const double eA = std::exp(sigma * A);
    tc.delta = 1.1 * (eA / sigma) * (8.0 * sup_amp + 2.0 * M_E * y_d_sup * steady.p_star);
    tc.mu1 = gain * std::min({1.0, inf_lo, inf_hi}) - 4.0 * y_d_sup * steady.p_star;
    tc.mu2 = sigma * tc.delta - 8.0 * sup_amp * eA - 2.0 * std::exp(sigma * A + 1.0) * y_d_sup * steady.p_star;
    tc.L = std::min(tc.mu1, tc.mu2 / tc.delta);
    tc.certificate_available = tc.mu1 >= 0.0 && tc.mu2 > 0.0;
    if (tc.mu1 == 0.0) tc.note = "mu1 = 0: decay rate degenerates, certificate is marginal";
    if (tc.mu1 < 0.0) tc.note = "mu1 < 0: reference amplitude too large for the band";
    if (tc.mu2 <= 0.0) tc.note = "mu2 <= 0: certificate unavailable";
    return tc;
}

}  // namespace larvae
