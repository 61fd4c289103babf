#include "larvae/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "larvae/dynamics.hpp"
#include "larvae/errors.hpp"
#include "larvae/quadrature.hpp"

namespace larvae {

LyapunovPoint lyapunov_VI(double eta, double k_I) {
    LyapunovPoint p;
    p.phi_I = k_I * std::expm1(eta);
    p.V_I = k_I * (std::expm1(eta) - eta);
    return p;
}

QForm q_form(const EnvSample& s) {
    QForm q;
    const double D = s.Gamma + s.gamma - 2.0 * s.K;
    if (D == 0.0) return q;  // defined stays false
    q.defined = true;
    const double GG = s.Gamma * s.gamma;
    q.q11 = s.Gamma * GG / (s.K * D);
    q.q12 = -GG / D;
    q.q22 = s.gamma * GG / (s.K * D);
    q.positive_definite = (s.K * s.K < GG) && (2.0 * s.K < s.Gamma + s.gamma);

    const double diff = s.Gamma - s.gamma;
    const double disc = std::sqrt(D * D * (diff * diff + 4.0 * s.K * s.K));
    q.lambda_min =
        (2.0 * GG / s.K) * (GG - s.K * s.K) / (D * (s.Gamma + s.gamma) + disc);
    return q;
}

double q_lambda_min_eigensolve(const QForm& q) {
    const double tr = q.q11 + q.q22;
    const double diff = q.q11 - q.q22;
    return 0.5 * (tr - std::sqrt(diff * diff + 4.0 * q.q12 * q.q12));
}

ConditionReport check_conditions(const EnvironmentSignal& env, double horizon, double dt) {
    ConditionReport rep;
    const int steps = std::max(1, static_cast<int>(std::llround(horizon / dt)));
    rep.eps_K = std::numeric_limits<double>::infinity();
    double delta_lambda = std::numeric_limits<double>::infinity();
    double c_max = -std::numeric_limits<double>::infinity();
    bool all_pd = true;
    for (int k = 0; k <= steps; ++k) {
        const double t = horizon > 0.0 ? std::min(horizon, dt * k) : 0.0;
        const EnvSample s = env.at(t);
        rep.t.push_back(t);
        rep.eps_K = std::min(rep.eps_K, s.K);
        rep.sup_K = std::max(rep.sup_K, s.K);
        rep.sup_Gamma = std::max(rep.sup_Gamma, s.Gamma);
        rep.sup_gamma = std::max(rep.sup_gamma, s.gamma);

        const bool growth = s.K * s.K < s.Gamma * s.gamma;
        const bool pressure = 2.0 * s.K < s.Gamma + s.gamma;
        const bool relaxed = s.K / (std::sqrt(s.Gamma) + 1.0) < std::sqrt(s.gamma + 1.0);
        rep.cond_growth.push_back(growth ? 1 : 0);
        rep.cond_pressure.push_back(pressure ? 1 : 0);
        rep.cond_relaxed.push_back(relaxed ? 1 : 0);
        rep.implication_ok.push_back((!(growth && pressure) || relaxed) ? 1 : 0);

        const QForm q = q_form(s);
        rep.lambda_min.push_back(q.defined ? q.lambda_min : 0.0);
        if (q.defined && q.positive_definite) {
            delta_lambda = std::min(delta_lambda, q.lambda_min);
            c_max = std::max(c_max, q.lambda_min);
        } else {
            all_pd = false;
        }
        if (horizon <= 0.0) break;
    }
    rep.all_pd = all_pd;
    if (all_pd) {
        rep.delta_lambda = delta_lambda;
        rep.c_max = c_max;
        rep.C = (rep.sup_K * c_max + rep.sup_Gamma * rep.sup_gamma) / (2.0 * rep.eps_K);
        rep.C_available = true;
    }
    return rep;
}

double lag_decay_norm(const LagBuffer& psi, double da, double sigma) {
    double peak = 0.0;
    double floor = std::numeric_limits<double>::infinity();
    for (int j = 0; j < psi.size(); ++j) {
        const double v = psi.at_lag(j);
        peak = std::max(peak, std::fabs(v) * std::exp(-sigma * da * j));
        floor = std::min(floor, v);
    }
    return peak / (1.0 + std::max(0.0, floor));
}

double lag_decay_norm_signed(const LagBuffer& psi, double da, double sigma) {
    double peak = 0.0;
    double floor = std::numeric_limits<double>::infinity();
    for (int j = 0; j < psi.size(); ++j) {
        const double v = psi.at_lag(j);
        peak = std::max(peak, std::fabs(v) * std::exp(-sigma * da * j));
        floor = std::min(floor, v);
    }
    return peak / (1.0 + std::min(floor, 0.0));
}

namespace {

double h_integrand(double z) {
    if (z < 1e-8) return z;  // limit of (e^z - 1)^2 / z
    const double e = std::expm1(z);
    return e * e / z;
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole,
                        double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = h_integrand(lm);
    const double frm = h_integrand(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace

double h_integral(double p) {
    if (p <= 0.0) return 0.0;
    const double fa = h_integrand(0.0);
    const double fb = h_integrand(p);
    const double fm = h_integrand(0.5 * p);
    const double whole = p / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(0.0, p, fa, fm, fb, whole, 1e-12 * std::max(1.0, whole), 40);
}

double composite_V(double V_I, double G, double gamma1, double sigma) {
    return V_I + gamma1 / sigma * h_integral(G);
}

bool region_A_member(double eta, double gamma1, double C, double k_I, bool control_positive) {
    if (!(gamma1 > C * k_I)) return false;
    if (!control_positive) return false;
    return eta <= std::log(std::sqrt(gamma1 / (C * k_I)));
}

H6Report check_H6(std::span<const double> g_F, std::span<const double> g_I, double kappa_I,
                  double kappa_F, double sigma, double da) {
    H6Report rep;
    rep.kappa_I = kappa_I;
    rep.kappa_F = kappa_F;
    rep.sigma = sigma;

    const int n = static_cast<int>(g_F.size());
    std::vector<double> age(n);
    for (int j = 0; j < n; ++j) age[j] = da * j;

    std::vector<double> age_gF(n), age_gI(n);
    for (int j = 0; j < n; ++j) {
        age_gF[j] = age[j] * g_F[j];
        age_gI[j] = age[j] * g_I[j];
    }
    rep.z_I = 1.0 / trapezoid(age_gF, da);
    rep.z_F = 1.0 / trapezoid(age_gI, da);

    const std::vector<double> tail_F = tail_trapezoid(g_F, da);
    const std::vector<double> tail_I = tail_trapezoid(g_I, da);

    std::vector<double> plain_F(n), plain_I(n), wF(n), wI(n);
    for (int j = 0; j < n; ++j) {
        plain_F[j] = std::fabs(g_F[j] - rep.z_I * kappa_I * tail_F[j]);
        plain_I[j] = std::fabs(g_I[j] - rep.z_F * kappa_F * tail_I[j]);
        const double w = std::exp(sigma * age[j]);
        wF[j] = plain_F[j] * w;
        wI[j] = plain_I[j] * w;
    }
    rep.plain_F = trapezoid(plain_F, da);
    rep.plain_I = trapezoid(plain_I, da);
    rep.weighted_F = trapezoid(wF, da);
    rep.weighted_I = trapezoid(wI, da);
    rep.plain_ok = rep.plain_F < 1.0 && rep.plain_I < 1.0;
    rep.weighted_ok = rep.weighted_F < 1.0 && rep.weighted_I < 1.0;
    return rep;
}

namespace {

/// Minimum over kappa of the weighted contraction integral for one kernel.
/// The integrand is the integral of an absolute value of an affine function
/// of kappa, hence convex: ternary search.
double min_contraction(std::span<const double> g, double z, double sigma, double da,
                       double* kappa_out) {
    const int n = static_cast<int>(g.size());
    const std::vector<double> tail = tail_trapezoid(g, da);
    auto value = [&](double kappa) {
        std::vector<double> f(n);
        for (int j = 0; j < n; ++j)
            f[j] = std::fabs(g[j] - z * kappa * tail[j]) * std::exp(sigma * da * j);
        return trapezoid(f, da);
    };
    double lo = 0.0, hi = 5.0;
    for (int it = 0; it < 200; ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (value(m1) <= value(m2))
            hi = m2;
        else
            lo = m1;
    }
    const double kappa = 0.5 * (lo + hi);
    if (kappa_out) *kappa_out = kappa;
    return value(kappa);
}

}  // namespace

H6Search h6_search(std::span<const double> g_F, std::span<const double> g_I, double da,
                   double sigma_lo, double sigma_hi) {
    H6Search best;
    std::vector<double> age_gF(g_F.size()), age_gI(g_I.size());
    for (std::size_t j = 0; j < g_F.size(); ++j) age_gF[j] = da * j * g_F[j];
    for (std::size_t j = 0; j < g_I.size(); ++j) age_gI[j] = da * j * g_I[j];
    const double z_I = 1.0 / trapezoid(age_gF, da);
    const double z_F = 1.0 / trapezoid(age_gI, da);

    auto feasible = [&](double sigma, double* kI, double* kF) {
        double kappa_I = 0.0, kappa_F = 0.0;
        const double vF = min_contraction(g_F, z_I, sigma, da, &kappa_I);
        const double vI = min_contraction(g_I, z_F, sigma, da, &kappa_F);
        if (kI) *kI = kappa_I;
        if (kF) *kF = kappa_F;
        return vF < 1.0 && vI < 1.0;
    };

    double kI = 0.0, kF = 0.0;
    if (!feasible(sigma_lo, &kI, &kF)) return best;  // infeasible even at the floor
    best.feasible = true;
    best.sigma = sigma_lo;
    best.kappa_I = kI;
    best.kappa_F = kF;

    if (feasible(sigma_hi, &kI, &kF)) {
        best.sigma = sigma_hi;
        best.kappa_I = kI;
        best.kappa_F = kF;
        return best;
    }
    double lo = sigma_lo, hi = sigma_hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid, &kI, &kF)) {
            lo = mid;
            best.sigma = mid;
            best.kappa_I = kI;
            best.kappa_F = kF;
        } else {
            hi = mid;
        }
    }
    return best;
}

double kappa_W(double s, double sigma, double A, double delta) {
    return (std::sqrt(s) + std::exp(sigma * A) / delta * s) * std::exp(std::max(0.0, s - 1.0));
}

EnvelopeReport tracking_certificates(const OutputSeries& run, double delta, double sigma,
                                     double mu1, double mu2, double slack) {
    EnvelopeReport rep;
    if (!run.track_mode || !run.has_diag || run.W.empty()) {
        rep.note = "requires a tracking run recorded with diagnostics";
        return rep;
    }
    if (mu2 <= 0.0) {
        rep.note = "mu2 <= 0: certificate unavailable";
        return rep;
    }
    if (mu1 < 0.0) {
        rep.note = "mu1 < 0: certificate unavailable";
        return rep;
    }
    rep.available = true;
    rep.L = std::min(mu1, mu2 / delta);
    rep.W0 = run.W.front();
    rep.kappa_W0 = kappa_W(rep.W0, sigma, run.max_age, delta);

    rep.envelope_ok = true;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    rep.W_envelope_ok = true;
    const double W_amp = rep.W0 * std::exp(std::max(0.0, rep.W0 - 1.0));
    // absolute floor so a start exactly at the origin is not failed on the
    // ~1e-16 feedforward-cancellation noise
    constexpr double kArithmeticFloor = 1e-14;
    for (std::size_t i = 0; i < run.t.size(); ++i) {
        const double decay = std::exp(-rep.L * run.t[i] / 4.0);
        const double bound = rep.kappa_W0 * decay * (1.0 + slack);
        const double margin = run.ln_ratio_sup[i] - bound;
        rep.worst_margin = std::max(rep.worst_margin, margin);
        if (margin > kArithmeticFloor) rep.envelope_ok = false;

        const double w_bound =
            W_amp * std::exp(-rep.L * run.t[i] / 2.0) * (1.0 + slack);
        if (run.eta[i] * run.eta[i] > w_bound + kArithmeticFloor) rep.W_envelope_ok = false;
    }

    rep.max_W_increase = 0.0;
    double dt = run.t.size() > 1 ? run.t[1] - run.t[0] : 1.0;
    for (std::size_t i = 1; i < run.W.size(); ++i)
        rep.max_W_increase = std::max(rep.max_W_increase, run.W[i] - run.W[i - 1]);
    rep.W_monotone = rep.max_W_increase <= 1e-8 + dt * dt;
    return rep;
}

}  // namespace larvae
