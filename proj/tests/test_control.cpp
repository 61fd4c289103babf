#include <doctest.h>

#include <cmath>
#include <random>

#include "larvae/control.hpp"
#include "larvae/dynamics.hpp"
#include "larvae/equilibrium.hpp"
#include "larvae/errors.hpp"
#include "support.hpp"

using namespace larvae;

TEST_CASE("static law") {
    CHECK(static_control(2.5) == 2.5);
    Controller c = Controller::static_law(2.5);
    for (double t : {0.0, 3.7, 100.0})
        CHECK(c.sample(t, {}, {1, 1, 1}, 1.0).P_total == 2.5);
}

TEST_CASE("drift-cancelling law") {
    ScenarioConfig cfg = support::fixture("fig1");
    SteadyState steady = solve_steady_state(cfg.P_star, cfg);

    SUBCASE("reduces to the static level at the nominal means, at every t") {
        EnvSample nominal{cfg.env.K_star, cfg.env.Gamma_star, cfg.env.gamma_star};
        for (double t : {0.0, 1.0, 13.25, 40.0})
            CHECK(stabilizing_control(cfg.P_star, steady.k_I, cfg.env, nominal) == cfg.P_star);
    }

    SUBCASE("growth-rate bump enters through 1 - k_I gamma*/K*") {
        const double delta = 0.37;
        EnvSample bumped{cfg.env.K_star, cfg.env.Gamma_star + delta, cfg.env.gamma_star};
        const double expected =
            cfg.P_star + delta * (1.0 - steady.k_I * cfg.env.gamma_star / cfg.env.K_star);
        CHECK(stabilizing_control(cfg.P_star, steady.k_I, cfg.env, bumped) ==
              doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("closes the loop on the damped-transient scenario") {
        ScenarioConfig fig5 = support::fixture("fig5");
        SteadyState st5 = solve_steady_state(fig5.P_star, fig5);
        Controller law = make_controller(fig5, st5);
        CHECK(std::isfinite(law.sample(0.0, fig5.env, fig5.env.at(0.0), st5.y_star).P_total));
        OutputSeries run = simulate(fig5, st5, law);
        CHECK(std::fabs(run.eta.back()) < 1e-6);
    }
}

TEST_CASE("log feedback") {
    CHECK(feedback(1.0, 1.0, 3.0) == 0.0);
    CHECK(feedback(M_E * 2.0, 2.0, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(feedback(0.0, 1.0, 1.0), NumericalError);
    CHECK_THROWS_AS(feedback(-1.0, 1.0, 1.0), NumericalError);

    SUBCASE("invariant under common rescaling") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> pos(0.1, 10.0);
        for (int k = 0; k < 200; ++k) {
            const double y = pos(rng), yd = pos(rng), c = pos(rng), alpha = pos(rng);
            CHECK(feedback(c * y, c * yd, alpha) ==
                  doctest::Approx(feedback(y, yd, alpha)).epsilon(1e-10));
        }
    }

    SUBCASE("sign matches the suppression direction") {
        CHECK(feedback(2.0, 1.0, 1.0) > 0.0);  // above target: suppress more
        CHECK(feedback(0.5, 1.0, 1.0) < 0.0);
    }
}

TEST_CASE("feedforward") {
    ScenarioConfig cfg = support::fixture("fig2");
    SteadyState steady = solve_steady_state(cfg.P_star, cfg);
    const EnvSample nominal{cfg.env.K_star, cfg.env.Gamma_star, cfg.env.gamma_star};

    SUBCASE("holding the equilibrium output needs exactly the static level") {
        const double P_FF =
            feedforward(steady.zeta_I, steady.p_star, nominal, steady.y_star, 0.0);
        CHECK(P_FF == doctest::Approx(cfg.P_star).epsilon(1e-10));
    }

    SUBCASE("exponential references shift by the log-derivative") {
        const double c = 0.21;
        const double base =
            feedforward(steady.zeta_I, steady.p_star, nominal, steady.y_star, 0.0);
        const double moved = feedforward(steady.zeta_I, steady.p_star, nominal, steady.y_star,
                                         c * steady.y_star);
        CHECK(moved == doctest::Approx(base - c).epsilon(1e-10));
    }

    SUBCASE("nonpositive reference is rejected") {
        CHECK_THROWS_AS(feedforward(0.0, 1.0, nominal, 0.0, 0.0), ValidationError);
    }
}

TEST_CASE("reference bundle") {
    ScenarioConfig cfg = support::fixture("fig6");
    SteadyState steady = solve_steady_state(cfg.P_star, cfg);
    Reference ref = make_reference(cfg.control, steady.y_star, cfg.horizon, cfg.grid.spacing());

    SUBCASE("value and closed-form rate at t = 0") {
        CHECK(ref.value(0.0) == doctest::Approx(steady.y_star).epsilon(1e-12));
        CHECK(ref.rate(0.0) == doctest::Approx(2.0 * M_PI / 30.0).epsilon(1e-12));
    }

    SUBCASE("finite-difference fallback approximates the closed form") {
        ControlSection no_rate = cfg.control;
        no_rate.reference_rate = Expression();
        Reference fd = make_reference(no_rate, steady.y_star, cfg.horizon, cfg.grid.spacing());
        for (double t : {0.0, 2.0, 5.5})
            CHECK(fd.rate(t) == doctest::Approx(ref.rate(t)).epsilon(1e-4));
    }
}

TEST_CASE("saturation") {
    SUBCASE("inside the band passes through") {
        Saturation s = saturate(0.05, 5.7, 5.6, 5.8);
        CHECK(s.value == 0.05);
        CHECK_FALSE(s.active);
    }

    SUBCASE("large demands clamp to the shifted bound") {
        Saturation s = saturate(1e9, 5.7, 5.6, 5.8);
        CHECK(s.value == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(s.active);
        Saturation lo = saturate(-1e9, 5.7, 5.6, 5.8);
        CHECK(lo.value == doctest::Approx(-0.1).epsilon(1e-12));
        CHECK(lo.active);
    }

    SUBCASE("feedforward outside the hard bounds is infeasible") {
        CHECK_THROWS_WITH_AS(saturate(0.0, 5.9, 5.6, 5.8), doctest::Contains("infeasible"),
                             NumericalError);
    }

    SUBCASE("total control always lies inside the hard bounds") {
        std::mt19937 rng(99);
        std::uniform_real_distribution<double> raw(-50.0, 50.0);
        std::uniform_real_distribution<double> inside(5.6, 5.8);
        for (int k = 0; k < 500; ++k) {
            const double P_FF = inside(rng);
            Saturation s = saturate(raw(rng), P_FF, 5.6, 5.8);
            const double total = P_FF + s.value;
            CHECK(total >= 5.6 - 1e-12);
            CHECK(total <= 5.8 + 1e-12);
        }
    }
}

TEST_CASE("reference admissibility") {
    ScenarioConfig wide = support::fixture("fig6");
    SteadyState steady = solve_steady_state(wide.P_star, wide);

    SUBCASE("tiny positive references pass") {
        ScenarioConfig tiny = wide;
        tiny.control.reference = Expression::parse("0.001");
        tiny.control.reference_rate = Expression::parse("0");
        AdmissibilityReport rep = validate_reference(tiny, steady, tiny.control.alpha);
        CHECK(rep.amplitude_ok);
    }

    SUBCASE("the bundled wide-band reference passes both checks") {
        AdmissibilityReport rep = validate_reference(wide, steady, wide.control.alpha);
        CHECK(rep.pass);
        CHECK(rep.y_d_sup <= rep.y_d_bound);
        CHECK(rep.P_FF_min > wide.control.P_min);
        CHECK(rep.P_FF_max < wide.control.P_max);
    }

    SUBCASE("the constrained band fails with the first violation reported") {
        ScenarioConfig narrow = support::fixture("fig7");
        SteadyState st7 = solve_steady_state(narrow.P_star, narrow);
        AdmissibilityReport rep = validate_reference(narrow, st7, narrow.control.alpha);
        CHECK_FALSE(rep.pass);
        CHECK_FALSE(rep.amplitude_ok);  // interval cap shrinks with the band
        CHECK(rep.first_violation_t == 0.0);
        CHECK_FALSE(rep.first_violation.empty());
    }

    SUBCASE("amplitude violations report their onset time") {
        ScenarioConfig bad = wide;
        // admissible at t = 0, crosses the amplitude cap mid-run
        bad.control.reference = Expression::parse("y_star*exp(0.25*t)");
        bad.control.reference_rate = Expression::parse("0.25*y_star*exp(0.25*t)");
        AdmissibilityReport rep = validate_reference(bad, steady, bad.control.alpha);
        CHECK_FALSE(rep.pass);
        CHECK(rep.first_violation_t > 0.0);
    }
}

TEST_CASE("tracking decay constants") {
    ScenarioConfig wide = support::fixture("fig6");
    SteadyState steady = solve_steady_state(wide.P_star, wide);

    SUBCASE("wide band: certificate available with positive margin") {
        TrackingConstants tc = tracking_constants(wide, steady, 0.5);
        CHECK(tc.mu1 > 0.0);
        CHECK(tc.mu2 > 0.0);
        CHECK(tc.delta > 0.0);
        CHECK(tc.L > 0.0);
        CHECK(tc.certificate_available);
        CHECK(tc.L == doctest::Approx(std::min(tc.mu1, tc.mu2 / tc.delta)));
    }

    SUBCASE("narrow band: reference too large for the band, certificate off") {
        ScenarioConfig narrow = support::fixture("fig7");
        SteadyState st7 = solve_steady_state(narrow.P_star, narrow);
        TrackingConstants tc = tracking_constants(narrow, st7, 0.5);
        CHECK(tc.mu1 < 0.0);
        CHECK_FALSE(tc.certificate_available);
        CHECK_FALSE(tc.note.empty());
    }
}

TEST_CASE("controller construction") {
    ScenarioConfig cfg = support::fixture("fig2");
    SteadyState steady = solve_steady_state(cfg.P_star, cfg);

    SUBCASE("variant override") {
        Controller c = make_controller(cfg, steady, ControllerVariant::Stabilizing);
        CHECK(c.variant() == ControllerVariant::Stabilizing);
    }

    SUBCASE("tracking override without a reference is rejected") {
        CHECK_THROWS_AS(make_controller(cfg, steady, ControllerVariant::Tracking),
                        ValidationError);
    }

    SUBCASE("tracking sample decomposes and clamps") {
        ScenarioConfig trk = support::fixture("fig7");
        SteadyState st = solve_steady_state(trk.P_star, trk);
        Controller c = make_controller(trk, st);
        const ControlSample s =
            c.sample(0.0, trk.env, trk.env.at(0.0), 2.0 * c.reference_value(0.0));
        CHECK(s.saturated);
        CHECK(s.P_total == doctest::Approx(s.P_FF + s.P_FB_sat));
        CHECK(s.P_total <= trk.control.P_max + 1e-12);
        CHECK(s.P_total >= trk.control.P_min - 1e-12);
        CHECK(s.P_FB_raw > s.P_FB_sat);
    }
}
