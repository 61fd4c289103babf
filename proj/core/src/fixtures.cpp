#include "larvae/fixtures.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "larvae/errors.hpp"

namespace larvae {

using ordered_json = nlohmann::ordered_json;

namespace {

// Shared demographic family for the stabilization scenarios: steep adult
// mortality, a parabolic emergence window, and exponentially declining egg
// laying on (0, 4).
ordered_json classic_rates() {
    return ordered_json{{"mu_I", {{"expr", "0.36*exp(0.5*a)"}}},
                        {"mu_F", {{"expr", "0.36*exp(0.5*a)"}}},
                        {"mu_M", {{"expr", "0.36*exp(0.5*a)"}}},
                        {"beta", {{"expr", "3.68*exp(-0.5*a)"}}},
                        {"emergence", {{"expr", "(-a^2+4*a)/16"}}},
                        {"sex_ratio", 0.5}};
}

// Rate family for the output-tracking scenarios: short aquatic stage, flat
// mortality, high constant emergence (small p*), egg laying tuned so the
// equilibrium exponents sit near 0.01.
ordered_json tracking_rates() {
    return ordered_json{{"mu_I", {{"expr", "1"}}},
                        {"mu_F", {{"expr", "1"}}},
                        {"mu_M", {{"expr", "1"}}},
                        {"beta", {{"expr", "0.095333*exp(-a)"}}},
                        {"emergence", {{"expr", "50"}}},
                        {"sex_ratio", 0.5}};
}

ordered_json tracking_env() {
    return ordered_json{{"K", {{"expr", "K_star"}}},
                        {"Gamma", {{"expr", "Gamma_star"}}},
                        {"gamma", {{"expr", "gamma_star"}}},
                        {"K_star", 0.00901531},
                        {"Gamma_star", 6.0},
                        {"gamma_star", 0.0029112}};
}

ordered_json tracking_control(double P_min, double P_max) {
    return ordered_json{
        {"P_star", 5.7},
        {"variant", "tracking"},
        {"alpha", 4.0},
        {"P_min", P_min},
        {"P_max", P_max},
        {"reference", {{"expr", "y_star + sin(2*pi*t/30)*exp(-t/30)"}}},
        {"reference_rate",
         {{"expr",
           "(2*pi/30)*cos(2*pi*t/30)*exp(-t/30) - (1/30)*sin(2*pi*t/30)*exp(-t/30)"}}}};
}

ordered_json make_baseline() {
    ordered_json j;
    j["schema"] = "larvae-scenario/1";
    j["name"] = "baseline";
    j["comment"] =
        "Equilibrium benchmark on the classic rate family (A = 4). The sex "
        "ratio defaults to 0.5. A bisection scan over r in (0,1) cannot land "
        "the growth exponents on 0.01: the net-reproduction condition at "
        "zeta_I = zeta_F = 0.01 demands r ~ 1.3128, and the supremum of "
        "zeta_I over admissible sex ratios is about -0.234 under these "
        "environment constants (the acceptance suite reports the measured "
        "scan). Environment constants are unit-scale defaults.";
    j["age_grid"] = {{"max_age", 4.0}, {"intervals", 256}};
    j["rates"] = classic_rates();
    j["env"] = {{"K", {{"expr", "K_star"}}},      {"Gamma", {{"expr", "Gamma_star"}}},
                {"gamma", {{"expr", "gamma_star"}}}, {"K_star", 1.0},
                {"Gamma_star", 1.0},              {"gamma_star", 1.0}};
    j["control"] = {{"P_star", 0.25}, {"variant", "static"}};
    j["initial"] = {{"kind", "equilibrium"}};
    j["horizon"] = 10.0;
    return j;
}

ordered_json periodic_env() {
    return ordered_json{{"K", {{"expr", "K_star*(1+0.2*sin(3*pi*t/T))"}}},
                        {"Gamma", {{"expr", "Gamma_star*(1+0.3*sin(4*pi*t/T))"}}},
                        {"gamma", {{"expr", "gamma_star*(1+0.2*cos(3*pi*t/T))"}}},
                        {"K_star", 4.0},
                        {"Gamma_star", 4.0},
                        {"gamma_star", 1.0}};
}

ordered_json constant_env() {
    return ordered_json{{"K", {{"expr", "K_star"}}},
                        {"Gamma", {{"expr", "Gamma_star"}}},
                        {"gamma", {{"expr", "gamma_star"}}},
                        {"K_star", 4.0},
                        {"Gamma_star", 4.0},
                        {"gamma_star", 1.0}};
}

ordered_json damped_env() {
    return ordered_json{
        {"K", {{"expr", "K_star+0.5*K_star*exp(-t/10)"}}},
        {"Gamma", {{"expr", "Gamma_star*(1.0 + 0.25*exp(-t/40.0)*sin(2*pi*t/15.0))"}}},
        {"gamma", {{"expr", "gamma_star*(1+0.3*exp(-t/8)*sin(2*pi*t/20))"}}},
        {"K_star", 4.0},
        {"Gamma_star", 4.0},
        {"gamma_star", 1.0}};
}

ordered_json make_stabilization_fig(const std::string& name, const std::string& comment,
                                    ordered_json env, const std::string& variant, double eta0,
                                    double horizon) {
    ordered_json j;
    j["schema"] = "larvae-scenario/1";
    j["name"] = name;
    j["comment"] = comment;
    j["age_grid"] = {{"max_age", 4.0}, {"intervals", 128}};
    j["rates"] = classic_rates();
    j["env"] = std::move(env);
    j["control"] = {{"P_star", 2.5}, {"variant", variant}};
    j["initial"] = {{"kind", "transformed"}, {"eta0", eta0}};
    j["horizon"] = horizon;
    return j;
}

ordered_json make_tracking_fig(const std::string& name, const std::string& comment,
                               double P_min, double P_max) {
    ordered_json j;
    j["schema"] = "larvae-scenario/1";
    j["name"] = name;
    j["comment"] = comment;
    j["age_grid"] = {{"max_age", 2.0}, {"intervals", 256}};
    j["rates"] = tracking_rates();
    j["env"] = tracking_env();
    j["control"] = tracking_control(P_min, P_max);
    j["initial"] = {{"kind", "transformed"}, {"eta0", 0.5}};
    j["horizon"] = 6.0;
    return j;
}

ordered_json fixture_json(const std::string& name) {
    if (name == "baseline") return make_baseline();
    if (name == "fig1")
        return make_stabilization_fig(
            "fig1",
            "Periodic environment, constant suppression P = P*. The seasonal "
            "drift defeats the static level: the amplitude oscillates "
            "persistently instead of settling.",
            periodic_env(), "static", 0.3, 40.0);
    if (name == "fig2")
        return make_stabilization_fig(
            "fig2",
            "Autonomous baseline: constant environment at the nominal means "
            "with P = P*; the amplitude decays to the equilibrium.",
            constant_env(), "static", 0.3, 40.0);
    if (name == "fig3")
        return make_stabilization_fig(
            "fig3",
            "Periodic environment with the drift-cancelling feedback law; "
            "the amplitude converges despite the seasonal forcing.",
            periodic_env(), "stabilizing", 1.007, 40.0);
    if (name == "fig4")
        return make_stabilization_fig(
            "fig4",
            "Damped environmental transient with static control.",
            damped_env(), "static", 0.03, 60.0);
    if (name == "fig5")
        return make_stabilization_fig(
            "fig5",
            "Damped environmental transient with the drift-cancelling "
            "feedback law.",
            damped_env(), "stabilizing", 0.03, 60.0);
    if (name == "fig6")
        return make_tracking_fig(
            "fig6",
            "Output tracking with a wide admissible control band (2, 9): the "
            "feedback has room to act and the output converges quickly to "
            "the reference.",
            2.0, 9.0);
    if (name == "fig7")
        return make_tracking_fig(
            "fig7",
            "Output tracking with the constrained band (5.6, 5.8): the "
            "feedback clamps at the bounds for a large fraction of the run "
            "and convergence slows accordingly.",
            5.6, 5.8);
    throw ValidationError("unknown fixture '" + name + "'");
}

}  // namespace

std::vector<std::string> fixture_names() {
    return {"baseline", "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"};
}

std::string fixture_text(const std::string& name) {
    return fixture_json(name).dump(2) + "\n";
}

std::vector<std::string> write_fixtures(const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (const std::string& name : fixture_names()) {
        const std::string path = (std::filesystem::path(dir) / (name + ".json")).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("cannot write fixture '" + path + "'");
        out << fixture_text(name);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace larvae
