#include "larvae/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "larvae/errors.hpp"
#include "larvae/quadrature.hpp"

namespace larvae {

std::vector<double> survival_profile(double zeta, std::span<const double> mu,
                                     const AgeGrid& grid) {
    std::vector<double> hazard(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) hazard[j] = mu[j] + zeta;
    std::vector<double> cum = cumulative_trapezoid(hazard, grid.spacing());
    std::vector<double> out(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) out[j] = std::exp(-cum[j]);
    return out;
}

namespace {

struct ResidualParts {
    double residual = 0.0;
    double zeta_F = 0.0;
    double I0 = 0.0;
    double F0 = 0.0;
    double int_I_tilde = 0.0;
    double J_w = 0.0;
    double J_beta = 0.0;
    std::vector<double> I_tilde;
    std::vector<double> F_tilde;
};

constexpr double kInnerTol = 1e-10;
constexpr int kInnerMaxIter = 200;
constexpr double kInnerDamping = 0.5;

/// Damped fixed point x <- (1-d) x + d map(x). Throws on divergence.
double damped_fixed_point(double x0, const std::function<double(double)>& map,
                          const char* label) {
    double x = x0;
    for (int it = 0; it < kInnerMaxIter; ++it) {
        const double fx = map(x);
        if (!std::isfinite(fx) || std::fabs(fx) > 1e6)
            throw NumericalError(std::string("inner iteration divergence while solving ") + label);
        const double next = (1.0 - kInnerDamping) * x + kInnerDamping * fx;
        if (std::fabs(next - x) <= kInnerTol * std::max(1.0, std::fabs(next))) return next;
        x = next;
    }
    throw NumericalError(std::string("inner iteration did not converge for ") + label);
}

ResidualParts residual_parts(double zeta_I, const ScenarioConfig& cfg, const RateTable& tab) {
    const AgeGrid& grid = cfg.grid;
    const double da = grid.spacing();
    const double r = cfg.rates.sex_ratio;
    const EnvironmentSignal& env = cfg.env;

    ResidualParts parts;
    parts.I_tilde = survival_profile(zeta_I, tab.mu_I, grid);
    parts.int_I_tilde = trapezoid(parts.I_tilde, da);
    parts.J_w = trapezoid_product(tab.w, parts.I_tilde, da);

    // Boundary birth from the equilibrium balance; positive on the admissible
    // control range P* in (0, zeta_I + Gamma*).
    parts.I0 = (env.K_star / (env.Gamma_star * env.gamma_star)) *
               ((zeta_I + env.Gamma_star) - cfg.P_star) / parts.int_I_tilde;
    parts.F0 = r * parts.I0 * parts.J_w;

    const double F0 = parts.F0;
    parts.zeta_F = damped_fixed_point(
        0.0,
        [&](double x) {
            std::vector<double> ft = survival_profile(x, tab.mu_F, grid);
            return env.gamma_star * F0 * trapezoid(ft, da);
        },
        "zeta_F");
    parts.F_tilde = survival_profile(parts.zeta_F, tab.mu_F, grid);
    parts.J_beta = trapezoid_product(tab.beta, parts.F_tilde, da);
    parts.residual = r * parts.J_w * parts.J_beta - 1.0;
    return parts;
}

}  // namespace

double characteristic_residual(double zeta_I, double zeta_F, const ScenarioConfig& cfg,
                               double p_ctx, double m_ctx) {
    RateTable tab = sample_rates(cfg.rates, cfg.grid, p_ctx, m_ctx);
    const double da = cfg.grid.spacing();
    std::vector<double> it = survival_profile(zeta_I, tab.mu_I, cfg.grid);
    std::vector<double> ft = survival_profile(zeta_F, tab.mu_F, cfg.grid);
    const double J_w = trapezoid_product(tab.w, it, da);
    const double J_beta = trapezoid_product(tab.beta, ft, da);
    return cfg.rates.sex_ratio * J_w * J_beta - 1.0;
}

SteadyState solve_steady_state(double P_star, const ScenarioConfig& cfg) {
    const AgeGrid& grid = cfg.grid;
    const double da = grid.spacing();
    const EnvironmentSignal& env = cfg.env;
    if (!(P_star > 0.0))
        throw NumericalError("negative equilibrium: P_star must be positive");
    if (!(env.Gamma_star > 0.0) || !(env.gamma_star > 0.0))
        throw NumericalError("equilibrium requires positive nominal growth and competition");

    ScenarioConfig work = cfg;
    work.P_star = P_star;

    double p_ctx = 0.0;
    double m_ctx = 0.0;
    const bool coupled =
        cfg.rates.density_coupling != 0.0 || cfg.rates.male_coupling != 0.0;

    SteadyState out;
    out.grid = grid;
    out.P_star = P_star;

    for (int coupling_iter = 0; coupling_iter < 100; ++coupling_iter) {
        RateTable tab = sample_rates(cfg.rates, grid, p_ctx, m_ctx);

        // Keep I0 > 0 along the whole search: residual is decreasing in
        // zeta_I, so a root below P* - Gamma* means no positive equilibrium.
        double lo = P_star - env.Gamma_star + 1e-9 * std::max(1.0, std::fabs(P_star));
        double hi = std::max(10.0, lo + 1.0);
        auto res = [&](double z) { return residual_parts(z, work, tab).residual; };

        double res_lo = res(lo);
        if (res_lo < 0.0)
            throw NumericalError(
                "negative equilibrium: P_star lies outside (0, zeta_I + Gamma_star); "
                "no positive boundary birth exists");
        double res_hi = res(hi);
        int expand = 0;
        while (res_hi > 0.0 && expand++ < 12) {
            hi *= 2.0;
            res_hi = res(hi);
        }
        if (res_hi > 0.0)
            throw NumericalError("no equilibrium: characteristic residual does not change "
                                 "sign in the exponent bracket");

        while (hi - lo > 1e-13 * std::max(1.0, std::fabs(hi))) {
            const double mid = 0.5 * (lo + hi);
            if (res(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        const double zeta_I = 0.5 * (lo + hi);
        ResidualParts parts = residual_parts(zeta_I, work, tab);

        if (!(parts.I0 > 0.0))
            throw NumericalError("negative equilibrium: boundary birth I*(0) <= 0 at the "
                                 "characteristic root");

        out.zeta_I = zeta_I;
        out.zeta_F = parts.zeta_F;
        out.I0 = parts.I0;
        out.F0 = parts.F0;
        out.M0 = (1.0 - cfg.rates.sex_ratio) * parts.I0 * parts.J_w;
        out.I_tilde = parts.I_tilde;
        out.F_tilde = parts.F_tilde;

        const double M0 = out.M0;
        out.zeta_M = damped_fixed_point(
            0.0,
            [&](double x) {
                std::vector<double> mt = survival_profile(x, tab.mu_M, grid);
                return env.gamma_star * M0 * trapezoid(mt, da);
            },
            "zeta_M");
        out.M_tilde = survival_profile(out.zeta_M, tab.mu_M, grid);

        out.k_I = out.I0 * parts.int_I_tilde;
        out.rates = tab;

        if (!coupled) break;

        const double p_new = cfg.rates.density_coupling != 0.0 ? out.k_I : 0.0;
        std::vector<double> M_star(grid.nodes());
        for (int j = 0; j < grid.nodes(); ++j) M_star[j] = out.M0 * out.M_tilde[j];
        const double m_new = cfg.rates.male_coupling != 0.0
                                 ? trapezoid_product(tab.lambda, M_star, da)
                                 : 0.0;
        const bool settled = std::fabs(p_new - p_ctx) <= 1e-10 * std::max(1.0, p_new) &&
                             std::fabs(m_new - m_ctx) <= 1e-10 * std::max(1.0, m_new);
        p_ctx = 0.5 * p_ctx + 0.5 * p_new;
        m_ctx = 0.5 * m_ctx + 0.5 * m_new;
        if (settled) break;
        if (coupling_iter == 99)
            throw NumericalError("density/male coupling fixed point did not converge");
    }

    out.p_context = p_ctx;
    out.m_context = m_ctx;

    const int n = grid.nodes();
    out.I_star.resize(n);
    out.F_star.resize(n);
    out.M_star.resize(n);
    for (int j = 0; j < n; ++j) {
        out.I_star[j] = out.I0 * out.I_tilde[j];
        out.F_star[j] = out.F0 * out.F_tilde[j];
        out.M_star[j] = out.M0 * out.M_tilde[j];
    }

    out.y_star = trapezoid_product(out.rates.w, out.I_star, da);
    out.m_star = trapezoid_product(out.rates.lambda, out.M_star, da);

    out.p_of_a.resize(n);
    out.p_tilde.resize(n);
    for (int j = 0; j < n; ++j) {
        out.p_of_a[j] = out.I_star[j] / out.y_star;
        out.p_tilde[j] = out.rates.w[j] * out.p_of_a[j];
    }
    out.p_star = trapezoid(out.p_of_a, da);

    // Normalized kernels: renormalize against the discrete quadrature so the
    // renewal map is exactly mass preserving on the grid.
    auto normalized = [&](std::vector<double> v) {
        const double mass = trapezoid(v, da);
        if (!(mass > 0.0))
            throw NumericalError("kernel normalization failed: nonpositive mass");
        for (double& x : v) x /= mass;
        return v;
    };
    std::vector<double> gF_raw(n), gI_raw(n);
    for (int j = 0; j < n; ++j) {
        gF_raw[j] = out.rates.beta[j] * out.F_star[j];
        gI_raw[j] = out.rates.w[j] * out.I_star[j];
    }
    out.g_F = normalized(std::move(gF_raw));
    out.g_I = normalized(std::move(gI_raw));
    out.g = normalized(out.I_star);

    out.pi0_I = adjoint_eigenfunction(out, cfg);
    return out;
}

std::vector<double> adjoint_eigenfunction(const SteadyState& steady, const ScenarioConfig& cfg) {
    const AgeGrid& grid = steady.grid.intervals > 0 ? steady.grid : cfg.grid;
    const double da = grid.spacing();
    const int n = grid.nodes();

    std::vector<double> hazard(n);
    for (int j = 0; j < n; ++j) hazard[j] = steady.rates.mu_I[j] + steady.zeta_I;
    std::vector<double> cum = cumulative_trapezoid(hazard, da);

    // pi(a_j) = e^{c_j} * int_{a_j}^{A} beta(s) e^{-c(s)} ds
    std::vector<double> q(n);
    for (int j = 0; j < n; ++j) q[j] = steady.rates.beta[j] * std::exp(-cum[j]);
    std::vector<double> tail = tail_trapezoid(q, da);

    std::vector<double> pi(n);
    for (int j = 0; j < n; ++j) pi[j] = std::exp(cum[j]) * tail[j];
    pi[n - 1] = 0.0;
    return pi;
}

SexRatioScan find_sex_ratio(const ScenarioConfig& cfg, double zeta_target, double tol) {
    SexRatioScan scan;

    // The r the characteristic equation would require at the symmetric
    // target exponents, valid sex ratio or not.
    {
        RateTable tab = sample_rates(cfg.rates, cfg.grid);
        const double da = cfg.grid.spacing();
        std::vector<double> it = survival_profile(zeta_target, tab.mu_I, cfg.grid);
        std::vector<double> ft = survival_profile(zeta_target, tab.mu_F, cfg.grid);
        const double J_w = trapezoid_product(tab.w, it, da);
        const double J_beta = trapezoid_product(tab.beta, ft, da);
        scan.required_r = 1.0 / (J_w * J_beta);
    }

    auto zeta_at = [&](double r) {
        ScenarioConfig trial = cfg;
        trial.rates.sex_ratio = r;
        SteadyState s = solve_steady_state(cfg.P_star, trial);
        return std::pair<double, double>{s.zeta_I, s.zeta_F};
    };

    const double r_hi = 1.0 - 1e-9;
    auto [z_hi, zF_hi] = zeta_at(r_hi);
    scan.zeta_sup = z_hi;
    if (z_hi < zeta_target - tol) {
        // zeta_I is increasing in r, so the supremum over (0,1) already falls
        // short of the target: no admissible sex ratio reproduces it.
        scan.found = false;
        scan.r = r_hi;
        scan.zeta_I = z_hi;
        scan.zeta_F = zF_hi;
        return scan;
    }

    // Find a lower bracket end where zeta drops below the target. Very small
    // sex ratios can push the root below the positive-birth range, so back
    // off on solver failures.
    double r_lo = 0.25;
    double z_lo = z_hi;
    for (int k = 0; k < 40; ++k) {
        try {
            z_lo = zeta_at(r_lo).first;
        } catch (const NumericalError&) {
            r_lo = 0.5 * (r_lo + r_hi);
            continue;
        }
        if (z_lo < zeta_target) break;
        r_lo *= 0.5;
        if (r_lo < 1e-9) break;
    }
    if (!(z_lo < zeta_target)) {
        scan.found = false;
        scan.r = r_lo;
        scan.zeta_I = z_lo;
        return scan;
    }

    double lo = r_lo, hi = r_hi;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (zeta_at(mid).first < zeta_target)
            lo = mid;
        else
            hi = mid;
    }
    scan.r = 0.5 * (lo + hi);
    auto [zI, zF] = zeta_at(scan.r);
    scan.zeta_I = zI;
    scan.zeta_F = zF;
    scan.found = std::fabs(zI - zeta_target) <= std::max(tol, 1e-8);
    return scan;
}

}  // namespace larvae
