#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "larvae/equilibrium.hpp"
#include "larvae/errors.hpp"
#include "larvae/quadrature.hpp"
#include "support.hpp"

using namespace larvae;

namespace {

/// Independent quadrature route for the characteristic integrals: fine
/// composite Simpson on the closed-form integrands.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    double s = f(a) + f(b);
    const double h = (b - a) / n;
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
    return s * h / 3.0;
}

double classic_survival(double a, double zeta) {
    return std::exp(-(0.72 * (std::exp(0.5 * a) - 1.0) + zeta * a));
}

std::string patched(const std::string& name, const std::string& needle,
                    const std::string& replacement) {
    std::string text = fixture_text(name);
    const auto pos = text.find(needle);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, needle.size(), replacement);
}

}  // namespace

TEST_CASE("survival profile") {
    AgeGrid grid{4.0, 256};

    SUBCASE("zero hazard gives the flat profile") {
        std::vector<double> mu(grid.nodes(), 0.0);
        std::vector<double> s = survival_profile(0.0, mu, grid);
        for (double v : s) CHECK(v == doctest::Approx(1.0));
    }

    SUBCASE("pure exponential when only the exponent acts") {
        AgeGrid unit{1.0, 64};
        std::vector<double> mu(unit.nodes(), 0.0);
        std::vector<double> s = survival_profile(1.0, mu, unit);
        CHECK(s.back() == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    }

    SUBCASE("closed-form hazard integral on the classic rates") {
        std::vector<double> mu(grid.nodes());
        for (int j = 0; j < grid.nodes(); ++j) mu[j] = 0.36 * std::exp(0.5 * grid.node(j));
        std::vector<double> s = survival_profile(0.01, mu, grid);
        // antiderivative: 0.72 (e^{a/2} - 1) + 0.01 a, evaluated at a = 4
        const double expected = std::exp(-(0.72 * (std::exp(2.0) - 1.0) + 0.04));
        CHECK(expected == doctest::Approx(9.65e-3).epsilon(1e-3));
        CHECK(s.back() == doctest::Approx(expected).epsilon(1e-4));
        for (std::size_t j = 1; j < s.size(); ++j) CHECK(s[j] < s[j - 1]);  // nonincreasing
        CHECK(s.front() == 1.0);
    }
}

TEST_CASE("characteristic residual") {
    ScenarioConfig cfg = support::fixture("baseline");

    SUBCASE("no reproduction pins the residual at -1") {
        ScenarioConfig dead =
            parse_scenario(patched("baseline", "3.68*exp(-0.5*a)", "0"), "dead");
        CHECK(characteristic_residual(0.01, 0.01, dead) == doctest::Approx(-1.0));
    }

    SUBCASE("linearity in the egg-laying rate") {
        ScenarioConfig doubled =
            parse_scenario(patched("baseline", "3.68*exp(-0.5*a)", "7.36*exp(-0.5*a)"), "x2");
        const double res = characteristic_residual(-0.2, 0.05, cfg);
        const double res2 = characteristic_residual(-0.2, 0.05, doubled);
        CHECK(res2 == doctest::Approx(2.0 * (res + 1.0) - 1.0).epsilon(1e-12));
    }

    SUBCASE("agrees with an independent fine-Simpson route") {
        const double J_w = simpson(
            [](double a) { return (-a * a + 4.0 * a) / 16.0 * classic_survival(a, 0.01); }, 0.0,
            4.0, 4096);
        const double J_beta = simpson(
            [](double a) { return 3.68 * std::exp(-0.5 * a) * classic_survival(a, 0.01); }, 0.0,
            4.0, 4096);
        const double expected = 0.5 * J_w * J_beta - 1.0;
        CHECK(characteristic_residual(0.01, 0.01, cfg) ==
              doctest::Approx(expected).epsilon(1e-3));
    }
}

TEST_CASE("steady state solve") {
    ScenarioConfig cfg = support::fixture("baseline");
    SteadyState s = solve_steady_state(cfg.P_star, cfg);
    const double da = cfg.grid.spacing();

    SUBCASE("residual vanishes at the root") {
        CHECK(std::fabs(characteristic_residual(s.zeta_I, s.zeta_F, cfg)) < 1e-10);
    }

    SUBCASE("kernels are normalized exactly on the grid") {
        CHECK(trapezoid(s.g_F, da) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(trapezoid(s.g_I, da) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(trapezoid(s.g, da) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(trapezoid(s.p_tilde, da) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("internal identities") {
        CHECK(s.k_I == doctest::Approx(s.I0 * trapezoid(s.I_tilde, da)).epsilon(1e-12));
        CHECK(s.y_star == doctest::Approx(s.F0 / cfg.rates.sex_ratio).epsilon(1e-10));
        // growth-exponent balance: zeta_I = (G* g*/K*) k_I + P* - Gamma*
        const double balance = cfg.env.Gamma_star * cfg.env.gamma_star / cfg.env.K_star * s.k_I +
                               s.P_star - cfg.env.Gamma_star;
        CHECK(s.zeta_I == doctest::Approx(balance).epsilon(1e-10));
        // female exponent from its own definition
        std::vector<double> F_tot = s.F_star;
        CHECK(s.zeta_F ==
              doctest::Approx(cfg.env.gamma_star * trapezoid(F_tot, da)).epsilon(1e-8));
        CHECK(s.M0 == doctest::Approx(s.F0).epsilon(1e-12));  // r = 1/2
    }

    SUBCASE("boundary births shrink as the control rises, vanishing at the cap") {
        std::vector<double> P_values;
        double P = cfg.P_star;
        double prev_I0 = s.I0;
        // walk P* toward zeta_I + Gamma*; I*(0) must fall strictly
        for (int k = 1; k <= 4; ++k) {
            SteadyState trial = solve_steady_state(P, cfg);
            const double cap = trial.zeta_I + cfg.env.Gamma_star;
            P = P + 0.55 * (cap - P);
            SteadyState next = solve_steady_state(P, cfg);
            CHECK(next.I0 < prev_I0);
            prev_I0 = next.I0;
        }
        // approach the admissibility boundary self-consistently
        double P_edge = cfg.P_star;
        for (int k = 0; k < 30; ++k) {
            SteadyState trial = solve_steady_state(P_edge, cfg);
            P_edge = trial.zeta_I + cfg.env.Gamma_star - 1e-6;
        }
        SteadyState edge = solve_steady_state(P_edge, cfg);
        CHECK(edge.I0 < 1e-4 * s.I0);
        CHECK(edge.I0 > 0.0);
    }

    SUBCASE("profiles are positive multiples of the unit-birth shapes") {
        for (int j = 0; j < cfg.grid.nodes(); ++j) {
            CHECK(s.I_star[j] == doctest::Approx(s.I0 * s.I_tilde[j]));
            CHECK(s.I_star[j] > 0.0);
        }
        CHECK(s.I_tilde.front() == 1.0);
    }
}

TEST_CASE("refinement convergence of the exponent") {
    const double z64 = solve_steady_state(0.25, support::fixture("baseline", 64)).zeta_I;
    const double z128 = solve_steady_state(0.25, support::fixture("baseline", 128)).zeta_I;
    const double z256 = solve_steady_state(0.25, support::fixture("baseline", 256)).zeta_I;
    const double d1 = std::fabs(z64 - z128);
    const double d2 = std::fabs(z128 - z256);
    CHECK(d2 * 3.0 <= d1);  // trapezoid order: factor ~4 per doubling
}

TEST_CASE("solver error paths") {
    ScenarioConfig cfg = support::fixture("baseline");

    SUBCASE("control beyond the admissible range reports a negative equilibrium") {
        CHECK_THROWS_WITH_AS(solve_steady_state(5.0, cfg), doctest::Contains("negative"),
                             NumericalError);
        CHECK_THROWS_AS(solve_steady_state(0.0, cfg), NumericalError);
    }

    SUBCASE("no reproduction means no equilibrium") {
        ScenarioConfig dead =
            parse_scenario(patched("baseline", "3.68*exp(-0.5*a)", "0"), "dead");
        CHECK_THROWS_AS(solve_steady_state(0.25, dead), NumericalError);
    }
}

TEST_CASE("adjoint weight") {
    ScenarioConfig cfg = support::fixture("baseline", 1024);
    SteadyState s = solve_steady_state(cfg.P_star, cfg);

    SUBCASE("vanishes at the maximum age") { CHECK(s.pi0_I.back() == 0.0); }

    SUBCASE("no egg laying, no weight") {
        SteadyState muted = s;
        for (double& b : muted.rates.beta) b = 0.0;
        std::vector<double> pi = adjoint_eigenfunction(muted, cfg);
        for (double v : pi) CHECK(v == 0.0);
    }

    SUBCASE("matches the backward integration to 1e-6 relative") {
        // pi' = (zeta_I + mu) pi - beta, pi(A) = 0, integrated backward by RK4
        // directly on the closed-form rates.
        auto mu = [](double a) { return 0.36 * std::exp(0.5 * a); };
        auto beta = [](double a) { return 3.68 * std::exp(-0.5 * a); };
        auto f = [&](double a, double pi) { return (s.zeta_I + mu(a)) * pi - beta(a); };
        const double da = cfg.grid.spacing();
        const int sub = 4;
        const double h = -da / sub;
        std::vector<double> ode(cfg.grid.nodes());
        double pi = 0.0;
        double a = cfg.grid.max_age;
        ode[cfg.grid.intervals] = 0.0;
        for (int j = cfg.grid.intervals; j-- > 0;) {
            for (int kk = 0; kk < sub; ++kk) {
                const double k1 = f(a, pi);
                const double k2 = f(a + h / 2, pi + h / 2 * k1);
                const double k3 = f(a + h / 2, pi + h / 2 * k2);
                const double k4 = f(a + h, pi + h * k3);
                pi += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
                a += h;
            }
            ode[j] = pi;
        }
        double scale = 0.0, err = 0.0;
        for (int j = 0; j < cfg.grid.nodes(); ++j) {
            scale = std::max(scale, std::fabs(ode[j]));
            err = std::max(err, std::fabs(ode[j] - s.pi0_I[j]));
        }
        CHECK(err / scale < 1e-6);
        CHECK(s.pi0_I.front() > 0.0);
    }
}

TEST_CASE("sex-ratio scan") {
    ScenarioConfig cfg = support::fixture("baseline", 64);

    SUBCASE("recovers a reachable target") {
        ScenarioConfig probe = cfg;
        probe.rates.sex_ratio = 0.7;
        const double target = solve_steady_state(cfg.P_star, probe).zeta_I;
        SexRatioScan scan = find_sex_ratio(cfg, target, 1e-9);
        CHECK(scan.found);
        CHECK(scan.r == doctest::Approx(0.7).epsilon(1e-6));
        CHECK(scan.zeta_I == doctest::Approx(target).epsilon(1e-8));
    }

    SUBCASE("reports infeasibility of the 0.01 target honestly") {
        SexRatioScan scan = find_sex_ratio(cfg, 0.01);
        CHECK_FALSE(scan.found);
        CHECK(scan.zeta_sup < 0.01 - 1e-3);   // supremum over (0,1) falls short
        CHECK(scan.required_r > 1.0);         // the r the condition would need
        CHECK(scan.required_r == doctest::Approx(1.3128).epsilon(2e-3));
    }
}

TEST_CASE("density coupling closes through the outer fixed point") {
    // mu_I(a,p) = mu0(a) (1 + c_p p): a small positive coupling must lower the
    // aquatic stock relative to the uncoupled solve.
    std::string text = support::compare_scenario_json(64);
    ScenarioConfig base = parse_scenario(text, "cmp");
    const auto pos = text.find("\"sex_ratio\": 0.5");
    REQUIRE(pos != std::string::npos);
    std::string coupled_text =
        text.replace(pos, std::string("\"sex_ratio\": 0.5").size(),
                     "\"sex_ratio\": 0.5, \"density_coupling\": 0.02");
    ScenarioConfig coupled = parse_scenario(coupled_text, "cmp-coupled");

    SteadyState s0 = solve_steady_state(base.P_star, base);
    SteadyState s1 = solve_steady_state(coupled.P_star, coupled);
    CHECK(s1.p_context > 0.0);
    CHECK(s1.p_context == doctest::Approx(s1.k_I).epsilon(1e-6));
    CHECK(s1.k_I < s0.k_I);
}
