#pragma once

#include <vector>

#include "larvae/control.hpp"
#include "larvae/dynamics.hpp"
#include "larvae/equilibrium.hpp"
#include "larvae/scenario.hpp"

namespace larvae {

/// Direct first-order solver for the original transport system: unit-speed
/// aging advanced by exact one-cell shifts (CFL = 1), multiplicative
/// exponential sources, and boundary births from trapezoid integrals of the
/// end-of-step field. Deliberately simple so it can serve as an independent
/// reference for the transformed integrator.
class DirectSolver {
public:
    explicit DirectSolver(const ScenarioConfig& cfg);

    /// One step of size dt = da. The nonlocal terms are lagged explicitly:
    /// population integrals from the pre-step field.
    ControlSample step(DensityField& field, const Controller& controller) const;

    double output_y(const DensityField& field) const;
    double total(const std::vector<double>& cohort) const;

private:
    const ScenarioConfig& cfg_;
    RateTable rates_;
    bool density_coupled_ = false;
    bool male_coupled_ = false;
    std::vector<double> mu_I_base_;  // baseline aquatic mortality (unit density factor)
};

/// Relative L2-in-age disagreement between the transformed integrator and the
/// direct solver, from the same initial densities and controller.
struct CompareReport {
    std::vector<double> t;
    std::vector<double> errI;
    std::vector<double> errF;
    std::vector<double> errM;
    std::vector<double> err_y;
    double maxI = 0.0;
    double maxF = 0.0;
    double maxM = 0.0;
    double max_y = 0.0;
};
CompareReport compare_with_transform(const ScenarioConfig& cfg, const SteadyState& steady,
                                     const Controller& controller, double T);

}  // namespace larvae
