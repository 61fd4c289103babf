#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "larvae/scenario.hpp"

namespace larvae {

class LagBuffer;
struct OutputSeries;

/// V_I(eta) = k_I (e^eta - eta - 1) and its derivative phi_I = k_I (e^eta - 1).
struct LyapunovPoint {
    double V_I = 0.0;
    double phi_I = 0.0;
};
LyapunovPoint lyapunov_VI(double eta, double k_I);

/// The 2x2 quadratic form of the dissipation rate, its closed-form smallest
/// eigenvalue, and the positive-definiteness flags.
struct QForm {
    bool defined = false;  // false when the denominator Gamma + gamma - 2K vanishes
    double q11 = 0.0;
    double q12 = 0.0;
    double q22 = 0.0;
    double lambda_min = 0.0;
    bool positive_definite = false;  // K^2 < Gamma*gamma and 2K < Gamma + gamma
};
QForm q_form(const EnvSample& s);

/// Smallest eigenvalue of the assembled symmetric 2x2, by the direct
/// eigenvalue formula; the independent route against the closed form.
double q_lambda_min_eigensolve(const QForm& q);

/// Pointwise stability-condition scan over the run's time grid.
struct ConditionReport {
    std::vector<double> t;
    std::vector<std::uint8_t> cond_growth;     // K^2 < Gamma*gamma
    std::vector<std::uint8_t> cond_pressure;   // 2K < Gamma + gamma
    std::vector<std::uint8_t> cond_relaxed;    // K/(sqrt(Gamma)+1) < sqrt(gamma+1)
    std::vector<std::uint8_t> implication_ok;  // pd pair implies the relaxed bound
    std::vector<double> lambda_min;
    bool all_pd = false;
    double delta_lambda = 0.0;  // min over pd samples
    double c_max = 0.0;         // max over pd samples
    double eps_K = 0.0;         // min K over the horizon
    double sup_K = 0.0;
    double sup_Gamma = 0.0;
    double sup_gamma = 0.0;
    double C = 0.0;             // (|K| c + |Gamma||gamma|) / (2 eps)
    bool C_available = false;
};
ConditionReport check_conditions(const EnvironmentSignal& env, double horizon, double dt);

/// Decay-weighted sup functional over a lag history
/// max_a |psi(t-a)| e^{-a sigma} / (1 + max(0, min_a psi)).
double lag_decay_norm(const LagBuffer& psi, double da, double sigma);

/// Variant with the saturation-proof denominator 1 + min(min_a psi, 0).
double lag_decay_norm_signed(const LagBuffer& psi, double da, double sigma);

/// h(p) = int_0^p (e^z - 1)^2 / z dz by adaptive Simpson; the removable
/// singularity at zero is replaced by its limit below 1e-8.
double h_integral(double p);

/// Composite Lyapunov value V_I + (gamma1 / sigma) h(G).
double composite_V(double V_I, double G, double gamma1, double sigma);

/// Level-set membership for the region on which the stabilizing law stays
/// positive: eta <= ln sqrt(gamma1 / (C k_I)) with gamma1 > C k_I, and the
/// law actually remaining positive over the horizon.
bool region_A_member(double eta, double gamma1, double C, double k_I,
                     bool control_positive = true);

/// Kernel contraction check: the four integrals with the tail-subtracted
/// kernels, plain and exponentially weighted.
struct H6Report {
    double z_I = 0.0;  // 1 / mean age of g_F
    double z_F = 0.0;  // 1 / mean age of g_I
    double plain_F = 0.0;
    double plain_I = 0.0;
    double weighted_F = 0.0;
    double weighted_I = 0.0;
    bool plain_ok = false;
    bool weighted_ok = false;
    double kappa_I = 0.0;
    double kappa_F = 0.0;
    double sigma = 0.0;
};
H6Report check_H6(std::span<const double> g_F, std::span<const double> g_I, double kappa_I,
                  double kappa_F, double sigma, double da);

/// Largest sigma on [1e-4, 2] for which some kappa pair passes the weighted
/// checks, with the minimizing kappas.
struct H6Search {
    bool feasible = false;
    double sigma = 0.0;
    double kappa_I = 0.0;
    double kappa_F = 0.0;
};
H6Search h6_search(std::span<const double> g_F, std::span<const double> g_I, double da,
                   double sigma_lo = 1e-4, double sigma_hi = 2.0);

/// Envelope verification over a recorded tracking run.
struct EnvelopeReport {
    bool available = false;
    double L = 0.0;
    double W0 = 0.0;
    double kappa_W0 = 0.0;        // envelope amplitude
    bool envelope_ok = false;     // ln-ratio under the decaying envelope
    double worst_margin = 0.0;    // max of lhs - rhs over samples
    bool W_monotone = false;      // per-step increase within slack
    double max_W_increase = 0.0;
    bool W_envelope_ok = false;   // v^2 under the integrated bound
    std::string note;
};
EnvelopeReport tracking_certificates(const OutputSeries& run, double delta, double sigma,
                                     double mu1, double mu2, double slack = 1e-2);

/// kappa_W(s) = (sqrt(s) + e^{sigma A}/delta s) e^{max(0, s-1)}.
double kappa_W(double s, double sigma, double A, double delta);

}  // namespace larvae
