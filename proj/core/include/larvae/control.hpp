#pragma once

#include <functional>
#include <optional>
#include <string>

#include "larvae/equilibrium.hpp"
#include "larvae/scenario.hpp"

namespace larvae {

/// One evaluation of a control law. For the non-tracking laws only P_total
/// is meaningful.
struct ControlSample {
    double t = 0.0;
    double P_total = 0.0;
    double P_FF = 0.0;
    double P_FB_raw = 0.0;
    double P_FB_sat = 0.0;
    bool saturated = false;
};

enum class ControllerVariant { Static, Stabilizing, Tracking };

const char* variant_name(ControllerVariant v);

/// Constant suppression at the equilibrium level.
double static_control(double P_star);

/// Time-varying law that cancels environmental drift around the equilibrium:
/// P(t) = P* + (Gamma(t) - Gamma*) + k_I (Gamma* gamma* / K* - Gamma(t) gamma(t) / K(t)).
double stabilizing_control(double P_star, double k_I, const EnvironmentSignal& env,
                           const EnvSample& now);

/// Model-inversion feedforward that makes the reference an exact trajectory
/// of the nominal output dynamics. Throws ValidationError when y_d <= 0.
double feedforward(double zeta_I, double p_star, const EnvSample& now, double y_d,
                   double y_d_rate);

/// Logarithmic output feedback alpha * ln(y / y_d). Throws NumericalError on
/// a nonpositive output.
double feedback(double y, double y_d, double alpha);

/// Clamps the raw feedback into the band shifted by the feedforward so the
/// total stays inside [P_min, P_max]. Throws NumericalError when the
/// feedforward itself falls outside the hard bounds.
struct Saturation {
    double value = 0.0;
    bool active = false;
};
Saturation saturate(double P_FB_raw, double P_FF, double P_min, double P_max);

/// Reference function bundle: y_d(t) and its rate, from closed forms or a
/// centered finite difference.
struct Reference {
    std::function<double(double)> value;
    std::function<double(double)> rate;
};
Reference make_reference(const ControlSection& control, double y_star, double horizon,
                         double fd_step);

/// A configured control law. Pure: every sample is a function of time and the
/// observed output alone.
class Controller {
public:
    static Controller static_law(double P_star);
    static Controller stabilizing_law(double P_star, double k_I);
    static Controller tracking_law(double zeta_I, double p_star, double alpha, double P_min,
                                   double P_max, Reference reference);

    ControlSample sample(double t, const EnvironmentSignal& env, const EnvSample& now,
                         double y) const;
    ControllerVariant variant() const { return variant_; }
    const char* name() const { return variant_name(variant_); }

    double reference_value(double t) const { return reference_.value(t); }
    double reference_rate(double t) const { return reference_.rate(t); }
    double alpha() const { return alpha_; }
    double P_min() const { return P_min_; }
    double P_max() const { return P_max_; }

private:
    ControllerVariant variant_ = ControllerVariant::Static;
    double P_star_ = 0.0;
    double k_I_ = 0.0;
    double zeta_I_ = 0.0;
    double p_star_ = 0.0;
    double alpha_ = 1.0;
    double P_min_ = 0.0;
    double P_max_ = 0.0;
    Reference reference_;
};

/// Builds the controller a scenario requests, optionally overriding the
/// variant from the command line.
Controller make_controller(const ScenarioConfig& cfg, const SteadyState& steady,
                           std::optional<ControllerVariant> override_variant = std::nullopt);

/// Reference admissibility: the amplitude interval that keeps the decay
/// certificate alive and the feedforward band, sampled over the horizon.
struct AdmissibilityReport {
    bool pass = true;
    bool amplitude_ok = true;   // y_d within (0, bound]
    bool band_ok = true;        // P_FF within the shifted band
    double first_violation_t = -1.0;
    std::string first_violation;
    double y_d_bound = 0.0;     // admissible amplitude cap
    double y_d_sup = 0.0;
    double P_FF_min = 0.0;
    double P_FF_max = 0.0;
};
AdmissibilityReport validate_reference(const ScenarioConfig& cfg, const SteadyState& steady,
                                       double alpha);

/// Decay-certificate constants for the saturated tracking loop. sigma comes
/// from the kernel feasibility search (or the caller), delta sits 10% above
/// its structural lower bound, and L = min(mu1, mu2/delta).
struct TrackingConstants {
    double sigma = 0.0;
    double delta = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double L = 0.0;
    bool certificate_available = false;  // requires mu1 >= 0 and mu2 > 0
    std::string note;
};
TrackingConstants tracking_constants(const ScenarioConfig& cfg, const SteadyState& steady,
                                     double sigma);

}  // namespace larvae
