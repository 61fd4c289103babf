#include "larvae/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "larvae/control.hpp"
#include "larvae/csv.hpp"
#include "larvae/diagnostics.hpp"
#include "larvae/dynamics.hpp"
#include "larvae/equilibrium.hpp"
#include "larvae/errors.hpp"
#include "larvae/fixtures.hpp"
#include "larvae/pde_oracle.hpp"
#include "larvae/scenario.hpp"
#include "larvae/svg.hpp"
#include "larvae/version.hpp"

namespace larvae {

namespace {

std::string default_out(const std::string& scenario_path, const std::string& suffix) {
    return std::filesystem::path(scenario_path).stem().string() + "-" + suffix;
}

std::optional<ControllerVariant> parse_variant(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (s == "static") return ControllerVariant::Static;
    if (s == "stabilizing") return ControllerVariant::Stabilizing;
    if (s == "tracking") return ControllerVariant::Tracking;
    throw ValidationError("unknown controller '" + s + "'");
}

void print_warnings(const ScenarioConfig& cfg) {
    for (const auto& w : cfg.warnings) std::cerr << "note: " << w << "\n";
}

int run_equilibrium(const std::string& scenario, const std::string& out) {
    ScenarioConfig cfg = load_scenario(scenario);
    print_warnings(cfg);
    SteadyState s = solve_steady_state(cfg.P_star, cfg);

    CsvWriter csv;
    RunManifest m;
    m.subcommand = "equilibrium";
    m.scenario_path = scenario;
    m.out_path = out;
    m.extra = {{"zeta_I", format_double(s.zeta_I)},
               {"zeta_F", format_double(s.zeta_F)},
               {"zeta_M", format_double(s.zeta_M)},
               {"I0", format_double(s.I0)},
               {"F0", format_double(s.F0)},
               {"M0", format_double(s.M0)},
               {"k_I", format_double(s.k_I)},
               {"y_star", format_double(s.y_star)},
               {"p_star", format_double(s.p_star)}};
    csv.manifest(m);
    csv.columns({"a", "I_star", "F_star", "M_star", "g_F", "g_I", "g", "pi0_I"});
    for (int j = 0; j < cfg.grid.nodes(); ++j)
        csv.row({cfg.grid.node(j), s.I_star[j], s.F_star[j], s.M_star[j], s.g_F[j], s.g_I[j],
                 s.g[j], s.pi0_I[j]});
    csv.write(out);
    std::cout << "zeta_I=" << format_double(s.zeta_I) << " zeta_F=" << format_double(s.zeta_F)
              << " zeta_M=" << format_double(s.zeta_M) << " wrote " << out << "\n";
    return 0;
}

void write_series(const OutputSeries& run, const RunManifest& m, const std::string& out,
                  bool diag) {
    CsvWriter csv;
    csv.manifest(m);
    std::vector<std::string> cols = {"t", "eta", "y", "P"};
    if (run.track_mode) {
        cols.insert(cols.end(), {"y_d", "P_FF", "P_FB_raw", "P_FB_sat", "saturated"});
    }
    if (diag) {
        cols.insert(cols.end(), {"V_I", "G_I", "W"});
        if (run.track_mode) cols.push_back("ln_ratio_sup");
    }
    csv.columns(cols);
    for (std::size_t i = 0; i < run.t.size(); ++i) {
        std::vector<double> row = {run.t[i], run.eta[i], run.y[i], run.P[i]};
        if (run.track_mode) {
            row.push_back(run.y_d[i]);
            row.push_back(run.P_FF[i]);
            row.push_back(run.P_FB_raw[i]);
            row.push_back(run.P_FB_sat[i]);
            row.push_back(static_cast<double>(run.saturated[i]));
        }
        if (diag) {
            row.push_back(run.V_I[i]);
            row.push_back(run.G_I[i]);
            row.push_back(run.W[i]);
            if (run.track_mode) row.push_back(run.ln_ratio_sup[i]);
        }
        csv.row(row);
    }
    csv.write(out);
}

int run_simulate(const std::string& scenario, const std::string& controller_flag,
                 const std::string& out, const std::string& svg, bool diag, bool force_track) {
    ScenarioConfig cfg = load_scenario(scenario);
    print_warnings(cfg);
    SteadyState steady = solve_steady_state(cfg.P_star, cfg);

    std::optional<ControllerVariant> variant = parse_variant(controller_flag);
    if (force_track) variant = ControllerVariant::Tracking;
    Controller controller = make_controller(cfg, steady, variant);

    DiagnosticsOptions opts;
    opts.enabled = diag || controller.variant() == ControllerVariant::Tracking;
    H6Search h6 = h6_search(steady.g_F, steady.g_I, cfg.grid.spacing());
    opts.sigma_I = h6.feasible ? h6.sigma : 0.05;
    if (controller.variant() == ControllerVariant::Tracking) {
        TrackingConstants tc = tracking_constants(cfg, steady, opts.sigma_I);
        opts.delta = tc.delta;
    }

    OutputSeries run = simulate(cfg, steady, controller, opts);

    RunManifest m;
    m.subcommand = force_track ? "track" : "simulate";
    m.scenario_path = scenario;
    m.controller = controller.name();
    m.out_path = out;
    m.extra = {{"zeta_I", format_double(steady.zeta_I)},
               {"k_I", format_double(steady.k_I)},
               {"y_star", format_double(steady.y_star)},
               {"sigma_I", format_double(opts.sigma_I)},
               {"steps", std::to_string(run.total_steps)},
               {"saturated_steps", std::to_string(run.saturated_steps)}};
    if (run.nonpositive_P_samples > 0)
        m.extra.emplace_back("warning",
                             "control nonpositive at " +
                                 std::to_string(run.nonpositive_P_samples) + " samples");
    write_series(run, m, out, diag || run.track_mode);

    if (!svg.empty()) {
        std::vector<SvgChannel> channels = {{"eta", run.eta}, {"y", run.y}, {"P", run.P}};
        if (run.track_mode) channels.push_back({"y_d", run.y_d});
        emit_svg(svg, cfg.name + " (" + controller.name() + ")", run.t, channels);
    }
    std::cout << "simulated " << run.total_steps << " steps, wrote " << out << "\n";
    if (run.nonpositive_P_samples > 0)
        std::cerr << "warning: control nonpositive at " << run.nonpositive_P_samples
                  << " samples (outside the guaranteed region)\n";
    return 0;
}

int run_check(const std::string& scenario, bool h6_flag, const std::string& out) {
    ScenarioConfig cfg = load_scenario(scenario);
    print_warnings(cfg);
    SteadyState steady = solve_steady_state(cfg.P_star, cfg);

    ConditionReport rep = check_conditions(cfg.env, cfg.horizon, cfg.grid.spacing());

    std::cout << "environment: eps_K=" << format_double(rep.eps_K)
              << " sup_K=" << format_double(rep.sup_K)
              << " sup_Gamma=" << format_double(rep.sup_Gamma)
              << " sup_gamma=" << format_double(rep.sup_gamma) << "\n";
    if (rep.all_pd) {
        std::cout << "dissipation form positive definite on the whole horizon: delta_lambda="
                  << format_double(rep.delta_lambda) << " c=" << format_double(rep.c_max)
                  << " C=" << format_double(rep.C) << "\n";
        const double gamma1 = 2.0 * rep.C * steady.k_I;
        std::cout << "region bound: gamma1=" << format_double(gamma1)
                  << " eta_cap=" << format_double(std::log(std::sqrt(gamma1 / (rep.C * steady.k_I))))
                  << "\n";
    } else {
        std::cout << "dissipation form loses positive definiteness somewhere on the horizon\n";
    }

    if (h6_flag) {
        H6Search h6 = h6_search(steady.g_F, steady.g_I, cfg.grid.spacing());
        if (h6.feasible) {
            H6Report full = check_H6(steady.g_F, steady.g_I, h6.kappa_I, h6.kappa_F, h6.sigma,
                                     cfg.grid.spacing());
            std::cout << "kernel contraction feasible: sigma=" << format_double(h6.sigma)
                      << " kappa_I=" << format_double(h6.kappa_I)
                      << " kappa_F=" << format_double(h6.kappa_F)
                      << " integrals=" << format_double(full.weighted_F) << ","
                      << format_double(full.weighted_I) << "\n";
        } else {
            std::cout << "kernel contraction infeasible on the searched range\n";
        }
    }

    if (cfg.control.variant == ControlSection::Variant::Tracking) {
        AdmissibilityReport adm = validate_reference(cfg, steady, cfg.control.alpha);
        std::cout << "reference admissibility: " << (adm.pass ? "pass" : "fail")
                  << " (sup y_d=" << format_double(adm.y_d_sup)
                  << ", cap=" << format_double(adm.y_d_bound)
                  << ", P_FF range=[" << format_double(adm.P_FF_min) << ","
                  << format_double(adm.P_FF_max) << "])";
        if (!adm.pass)
            std::cout << "; first violation at t=" << format_double(adm.first_violation_t)
                      << ": " << adm.first_violation;
        std::cout << "\n";
        H6Search h6 = h6_search(steady.g_F, steady.g_I, cfg.grid.spacing());
        TrackingConstants tc = tracking_constants(cfg, steady, h6.feasible ? h6.sigma : 0.05);
        std::cout << "decay certificate: "
                  << (tc.certificate_available ? "available" : "unavailable")
                  << " (mu1=" << format_double(tc.mu1) << ", mu2=" << format_double(tc.mu2)
                  << ", delta=" << format_double(tc.delta) << ", L=" << format_double(tc.L)
                  << ")";
        if (!tc.note.empty()) std::cout << "; " << tc.note;
        std::cout << "\n";
    }

    CsvWriter csv;
    RunManifest m;
    m.subcommand = "check";
    m.scenario_path = scenario;
    m.out_path = out;
    csv.manifest(m);
    csv.columns({"t", "cond_growth", "cond_pressure", "cond_relaxed", "implication_ok",
                 "lambda_min"});
    for (std::size_t i = 0; i < rep.t.size(); ++i)
        csv.row({rep.t[i], static_cast<double>(rep.cond_growth[i]),
                 static_cast<double>(rep.cond_pressure[i]),
                 static_cast<double>(rep.cond_relaxed[i]),
                 static_cast<double>(rep.implication_ok[i]), rep.lambda_min[i]});
    csv.write(out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int run_oracle_compare(const std::string& scenario, const std::string& controller_flag,
                       const std::string& out) {
    ScenarioConfig cfg = load_scenario(scenario);
    print_warnings(cfg);
    SteadyState steady = solve_steady_state(cfg.P_star, cfg);
    Controller controller = make_controller(cfg, steady, parse_variant(controller_flag));

    CompareReport rep = compare_with_transform(cfg, steady, controller, cfg.horizon);

    CsvWriter csv;
    RunManifest m;
    m.subcommand = "oracle-compare";
    m.scenario_path = scenario;
    m.controller = controller.name();
    m.out_path = out;
    m.extra = {{"maxI", format_double(rep.maxI)},
               {"maxF", format_double(rep.maxF)},
               {"maxM", format_double(rep.maxM)},
               {"max_y", format_double(rep.max_y)}};
    csv.manifest(m);
    csv.columns({"t", "errI", "errF", "errM", "err_y"});
    for (std::size_t i = 0; i < rep.t.size(); ++i)
        csv.row({rep.t[i], rep.errI[i], rep.errF[i], rep.errM[i], rep.err_y[i]});
    csv.write(out);
    std::cout << "max relative errors: I=" << format_double(rep.maxI)
              << " F=" << format_double(rep.maxF) << " M=" << format_double(rep.maxM)
              << " y=" << format_double(rep.max_y) << "; wrote " << out << "\n";
    return 0;
}

int run_fixtures(const std::string& dir) {
    const std::vector<std::string> paths = write_fixtures(dir);
    for (const auto& p : paths) std::cout << "wrote " << p << "\n";
    return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{std::string(kToolName) + " " + kVersion +
                 " - age-structured aquatic population control toolkit"};
    app.require_subcommand(1);

    std::string scenario, out, svg, controller_flag;
    bool diag = false;
    bool h6_flag = false;
    std::string fixtures_dir = ".";

    auto* eq = app.add_subcommand("equilibrium", "solve the steady state and write profiles");
    eq->add_option("scenario", scenario, "scenario file")->required();
    eq->add_option("--out", out, "output CSV path");

    auto* sim = app.add_subcommand("simulate", "integrate the transformed dynamics");
    sim->add_option("scenario", scenario, "scenario file")->required();
    sim->add_option("--controller", controller_flag, "static|stabilizing|tracking");
    sim->add_option("--out", out, "output CSV path");
    sim->add_option("--svg", svg, "optional SVG chart path");
    sim->add_flag("--diag", diag, "append diagnostic channels");

    auto* trk = app.add_subcommand("track", "tracking run with control decomposition columns");
    trk->add_option("scenario", scenario, "scenario file")->required();
    trk->add_option("--out", out, "output CSV path");
    trk->add_option("--svg", svg, "optional SVG chart path");
    trk->add_flag("--diag", diag, "append diagnostic channels");

    auto* chk = app.add_subcommand("check", "stability-condition report");
    chk->add_option("scenario", scenario, "scenario file")->required();
    chk->add_flag("--h6-search", h6_flag, "search the kernel-contraction constants");
    chk->add_option("--out", out, "output CSV path");

    auto* cmp = app.add_subcommand("oracle-compare",
                                   "cross-validate the transform against the direct solver");
    cmp->add_option("scenario", scenario, "scenario file")->required();
    cmp->add_option("--controller", controller_flag, "static|stabilizing|tracking");
    cmp->add_option("--out", out, "output CSV path");

    auto* fix = app.add_subcommand("fixtures", "write the bundled scenario files");
    fix->add_option("--dir", fixtures_dir, "target directory");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (eq->parsed())
            return run_equilibrium(scenario,
                                   out.empty() ? default_out(scenario, "equilibrium.csv") : out);
        if (sim->parsed())
            return run_simulate(scenario, controller_flag,
                                out.empty() ? default_out(scenario, "run.csv") : out, svg, diag,
                                false);
        if (trk->parsed())
            return run_simulate(scenario, controller_flag,
                                out.empty() ? default_out(scenario, "track.csv") : out, svg,
                                diag, true);
        if (chk->parsed())
            return run_check(scenario, h6_flag,
                             out.empty() ? default_out(scenario, "check.csv") : out);
        if (cmp->parsed())
            return run_oracle_compare(scenario, controller_flag,
                                      out.empty() ? default_out(scenario, "compare.csv") : out);
        if (fix->parsed()) return run_fixtures(fixtures_dir);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace larvae
