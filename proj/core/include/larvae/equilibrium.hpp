#pragma once

#include <span>
#include <vector>

#include "larvae/age_grid.hpp"
#include "larvae/scenario.hpp"

namespace larvae {

/// Steady state of the three-cohort system: growth exponents, boundary
/// births, age profiles, normalized renewal kernels, the adjoint weight, and
/// the derived scalars used by the dynamics, control, and diagnostics layers.
struct SteadyState {
    AgeGrid grid;
    double P_star = 0.0;

    double zeta_I = 0.0;
    double zeta_F = 0.0;
    double zeta_M = 0.0;

    double I0 = 0.0;  // boundary births I*(0), F*(0), M*(0)
    double F0 = 0.0;
    double M0 = 0.0;

    std::vector<double> I_tilde;  // unit-birth survival shapes
    std::vector<double> F_tilde;
    std::vector<double> M_tilde;
    std::vector<double> I_star;  // absolute profiles
    std::vector<double> F_star;
    std::vector<double> M_star;

    double k_I = 0.0;     // integral of I*
    double y_star = 0.0;  // equilibrium emergence output, integral of w I*
    double p_star = 0.0;  // integral of p(a) = I*/y_star
    double m_star = 0.0;  // integral of lambda M*

    std::vector<double> p_of_a;   // I*(a) / y_star
    std::vector<double> p_tilde;  // w(a) p(a); integrates to 1 exactly
    std::vector<double> g_F;      // birth kernel  beta F* / integral
    std::vector<double> g_I;      // emergence kernel  w I* / integral
    std::vector<double> g;        // population kernel I* / k_I
    std::vector<double> pi0_I;    // adjoint weight, zero at max age

    // Rate tables at the converged density/pressure context, kept for the
    // dynamics and oracle layers.
    RateTable rates;
    double p_context = 0.0;
    double m_context = 0.0;
};

/// Survival shape exp(-int_0^a [mu(s) + zeta] ds) via cumulative trapezoid;
/// equals 1 at age zero.
std::vector<double> survival_profile(double zeta, std::span<const double> mu,
                                     const AgeGrid& grid);

/// Net-reproduction defect r * (int w I~) * (int beta F~) - 1 at the given
/// exponent pair. Zero at an equilibrium.
double characteristic_residual(double zeta_I, double zeta_F, const ScenarioConfig& cfg,
                               double p_ctx = 0.0, double m_ctx = 0.0);

/// Full steady-state solve at control level P_star: outer bisection on
/// zeta_I, damped fixed points for zeta_F and zeta_M, boundary births, and
/// every derived field. Throws NumericalError when no positive equilibrium
/// exists in the bracket or an inner iteration diverges.
SteadyState solve_steady_state(double P_star, const ScenarioConfig& cfg);

/// Adjoint weight pi0_I(a) = int_a^A beta(s) exp(int_s^a (zeta_I + mu_I)) ds
/// by quadrature; satisfies the backward equation
/// pi' = (zeta_I + mu_I) pi - beta with pi(A) = 0.
std::vector<double> adjoint_eigenfunction(const SteadyState& steady, const ScenarioConfig& cfg);

/// Bisection scan for a sex ratio r in (0,1) whose equilibrium exponent hits
/// zeta_target. `required_r` reports the r that the characteristic equation
/// would demand at zeta_I = zeta_F = zeta_target, whether or not it is a
/// valid sex ratio.
struct SexRatioScan {
    bool found = false;
    double r = 0.0;          // best r examined (the match when found)
    double zeta_I = 0.0;     // exponents achieved at r
    double zeta_F = 0.0;
    double zeta_sup = 0.0;   // exponent at the upper end of the r range
    double required_r = 0.0;
};
SexRatioScan find_sex_ratio(const ScenarioConfig& cfg, double zeta_target, double tol = 1e-10);

}  // namespace larvae
