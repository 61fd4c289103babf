#include "larvae/pde_oracle.hpp"

#include <cmath>

#include "larvae/errors.hpp"
#include "larvae/quadrature.hpp"

namespace larvae {

DirectSolver::DirectSolver(const ScenarioConfig& cfg) : cfg_(cfg) {
    rates_ = sample_rates(cfg.rates, cfg.grid);
    density_coupled_ = cfg.rates.density_coupling != 0.0;
    male_coupled_ = cfg.rates.male_coupling != 0.0;
    mu_I_base_ = cfg.rates.mu_I0.sample(cfg.grid);
}

double DirectSolver::output_y(const DensityField& field) const {
    return trapezoid_product(rates_.w, field.I, cfg_.grid.spacing());
}

double DirectSolver::total(const std::vector<double>& cohort) const {
    return trapezoid(cohort, cfg_.grid.spacing());
}

ControlSample DirectSolver::step(DensityField& field, const Controller& controller) const {
    const double da = cfg_.grid.spacing();
    const double dt = da;
    const int n = cfg_.grid.nodes();
    const double t = field.t;
    const EnvSample env_now = cfg_.env.at(t);

    // Nonlocal terms from the pre-step field (explicit lagging).
    const double pop_I = trapezoid(field.I, da);
    const double pop_F = trapezoid(field.F, da);
    const double pop_M = trapezoid(field.M, da);

    const ControlSample cs =
        controller.sample(t, cfg_.env, env_now, std::max(output_y(field), 1e-300));

    const double R_I =
        env_now.Gamma * (1.0 - env_now.gamma / env_now.K * pop_I) - cs.P_total;
    const double R_F = -env_now.gamma * pop_F;
    const double R_M = -env_now.gamma * pop_M;

    std::vector<double> mu_I(n);
    if (density_coupled_) {
        const double factor = 1.0 + cfg_.rates.density_coupling * pop_I;
        for (int j = 0; j < n; ++j) mu_I[j] = mu_I_base_[j] * factor;
    } else {
        mu_I = rates_.mu_I;
    }

    // Exact shift along characteristics plus multiplicative source; the
    // per-cell mortality integral uses the trapezoid between source and
    // destination nodes.
    for (int j = n - 1; j >= 1; --j) {
        const double mI = 0.5 * da * (mu_I[j - 1] + mu_I[j]);
        const double mF = 0.5 * da * (rates_.mu_F[j - 1] + rates_.mu_F[j]);
        const double mM = 0.5 * da * (rates_.mu_M[j - 1] + rates_.mu_M[j]);
        field.I[j] = field.I[j - 1] * std::exp(dt * R_I - mI);
        field.F[j] = field.F[j - 1] * std::exp(dt * R_F - mF);
        field.M[j] = field.M[j - 1] * std::exp(dt * R_M - mM);
    }

    // Boundary births from the shifted (end-of-step) field. The two a = 0
    // quadrature endpoints reference each other, so solve the small linear
    // system exactly rather than reading stale slots.
    std::vector<double> beta = rates_.beta;
    if (male_coupled_) {
        field.M[0] = 0.0;  // boundary not yet known; drop the stale slot
        const double m_now = trapezoid_product(rates_.lambda, field.M, da);
        const std::vector<double> beta0 = cfg_.rates.beta0.sample(cfg_.grid);
        for (int j = 0; j < n; ++j)
            beta[j] = beta0[j] * (1.0 + cfg_.rates.male_coupling * m_now);
    }
    const double r = cfg_.rates.sex_ratio;
    field.F[0] = 0.0;
    field.I[0] = 0.0;
    const double S_beta = trapezoid_product(beta, field.F, da);
    const double S_w = trapezoid_product(rates_.w, field.I, da);
    const double w_beta0 = 0.5 * da * beta[0];
    const double w_w0 = 0.5 * da * rates_.w[0];
    field.I[0] = (S_beta + r * w_beta0 * S_w) / (1.0 - r * w_beta0 * w_w0);
    const double births = S_w + w_w0 * field.I[0];
    field.F[0] = r * births;
    field.M[0] = (1.0 - r) * births;

    for (int j = 0; j < n; ++j) {
        if (field.I[j] < 0.0 || field.F[j] < 0.0 || field.M[j] < 0.0 ||
            !std::isfinite(field.I[j]) || !std::isfinite(field.F[j]) ||
            !std::isfinite(field.M[j]))
            throw NumericalError("direct solver: field left the nonnegative cone");
    }
    field.t = t + dt;
    return cs;
}

namespace {

double rel_l2(const std::vector<double>& a, const std::vector<double>& b, double da) {
    std::vector<double> diff2(a.size()), ref2(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        diff2[j] = d * d;
        ref2[j] = b[j] * b[j];
    }
    const double num = std::sqrt(trapezoid(diff2, da));
    const double den = std::sqrt(trapezoid(ref2, da));
    return num / std::max(den, 1e-300);
}

}  // namespace

CompareReport compare_with_transform(const ScenarioConfig& cfg, const SteadyState& steady,
                                     const Controller& controller, double T) {
    const double da = cfg.grid.spacing();
    const long steps = std::lround(T / da);
    if (std::fabs(steps * da - T) > 1e-9 * std::max(1.0, T))
        throw ValidationError("comparison horizon must be a whole number of steps");

    const SimMode mode = controller.variant() == ControllerVariant::Tracking
                             ? SimMode::Track
                             : SimMode::Stabilize;

    DensityField direct = initial_density(cfg, steady);
    double y_d0 = 0.0;
    if (mode == SimMode::Track) y_d0 = controller.reference_value(0.0);
    TransformedState transformed = init_from_density(direct, steady, mode, y_d0);

    DirectSolver solver(cfg);
    CompareReport rep;

    auto sample = [&]() {
        const double y_d_now =
            mode == SimMode::Track ? controller.reference_value(transformed.t) : 0.0;
        const DensityField from_transform = reconstruct(transformed, steady, y_d_now);
        rep.t.push_back(direct.t);
        rep.errI.push_back(rel_l2(from_transform.I, direct.I, da));
        rep.errF.push_back(rel_l2(from_transform.F, direct.F, da));
        rep.errM.push_back(rel_l2(from_transform.M, direct.M, da));
        const double y_direct = solver.output_y(direct);
        const double y_transform = output_y(transformed, steady, y_d_now);
        rep.err_y.push_back(std::fabs(y_transform - y_direct) /
                            std::max(std::fabs(y_direct), 1e-300));
        rep.maxI = std::max(rep.maxI, rep.errI.back());
        rep.maxF = std::max(rep.maxF, rep.errF.back());
        rep.maxM = std::max(rep.maxM, rep.errM.back());
        rep.max_y = std::max(rep.max_y, rep.err_y.back());
    };

    sample();
    for (long k = 0; k < steps; ++k) {
        solver.step(direct, controller);
        step(transformed, controller, steady, cfg);
        sample();
    }
    return rep;
}

}  // namespace larvae
