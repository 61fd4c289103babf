#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "larvae/control.hpp"
#include "larvae/equilibrium.hpp"
#include "larvae/scenario.hpp"

namespace larvae {

/// Fixed-length lag history: slot j holds the value at lag a_j = j*da.
/// Advancing one time step shifts every slot by one lag and frees slot 0 for
/// the new boundary value, so delay reads are exact buffer lookups.
class LagBuffer {
public:
    LagBuffer() = default;
    explicit LagBuffer(int slots, double fill = 0.0) : data_(slots, fill) {}

    int size() const { return static_cast<int>(data_.size()); }
    double at_lag(int j) const { return data_[(head_ + j) % data_.size()]; }
    void set_lag(int j, double v) { data_[(head_ + j) % data_.size()] = v; }

    /// Shift by one lag; the freed slot 0 is initialized to `boundary`.
    void advance(double boundary) {
        head_ = (head_ + static_cast<int>(data_.size()) - 1) % static_cast<int>(data_.size());
        data_[head_] = boundary;
    }

    double min_value() const;
    double max_abs() const;

private:
    std::vector<double> data_;
    int head_ = 0;
};

enum class SimMode { Stabilize, Track };

/// Scalar log-amplitude plus the three lag histories.
struct TransformedState {
    SimMode mode = SimMode::Stabilize;
    double eta = 0.0;  // eta_I, or v_I in tracking mode
    double t = 0.0;
    LagBuffer psi_I;
    LagBuffer psi_F;
    LagBuffer psi_M;
};

struct DensityField {
    std::vector<double> I;
    std::vector<double> F;
    std::vector<double> M;
    double t = 0.0;
};

struct DiagnosticsOptions {
    bool enabled = false;
    double sigma_I = 0.05;   // lag-weight decay rate
    double gamma1 = 0.0;     // composite Lyapunov weight; 0 = pick default
    double delta = 1.0;      // tracking functional weight
};

/// Recorded trajectory. Diagnostic channels are filled when requested;
/// tracking channels only in tracking runs.
struct OutputSeries {
    std::vector<double> t;
    std::vector<double> eta;
    std::vector<double> y;
    std::vector<double> P;

    bool has_diag = false;
    std::vector<double> V_I;
    std::vector<double> G_I;
    std::vector<double> W;
    std::vector<double> ln_ratio_sup;  // sup_a |ln(I / I_d)| in tracking runs
    std::vector<double> F_psi;

    bool track_mode = false;
    std::vector<double> y_d;
    std::vector<double> P_FF;
    std::vector<double> P_FB_raw;
    std::vector<double> P_FB_sat;
    std::vector<std::uint8_t> saturated;

    long total_steps = 0;
    long saturated_steps = 0;
    long nonpositive_P_samples = 0;
    double sigma_I = 0.0;
    double delta = 0.0;
    double gamma1 = 0.0;
    double max_age = 0.0;
};

/// State at the origin of the transformed coordinates.
TransformedState init_equilibrium(const SteadyState& steady, SimMode mode = SimMode::Stabilize);

/// Projects raw densities onto the transformed coordinates: the adjoint
/// weight fixes the log-amplitude and the lag histories hold the shape
/// deviations. Throws ValidationError when the adjoint projection of the
/// initial aquatic density is nonpositive.
TransformedState init_from_density(const DensityField& field, const SteadyState& steady,
                                   SimMode mode = SimMode::Stabilize, double y_d0 = 0.0);

/// Inverse map back to densities. In tracking mode the aquatic profile is
/// rebuilt around the reference field p(a) y_d(t).
DensityField reconstruct(const TransformedState& state, const SteadyState& steady,
                         double y_d_now = 0.0);

/// Output by direct age quadrature of w * I.
double output_y_direct(const DensityField& field, const SteadyState& steady);

/// Output in transformed coordinates: amplitude times reference times the
/// lag-history correction factor.
double output_y(const TransformedState& state, const SteadyState& steady, double y_d_now = 0.0);

/// One step of size dt = da: RK4 on the scalar amplitude with the renewal
/// integrals frozen over the step, then a shift-and-append renewal update of
/// the lag buffers. Returns the control sample used at the step start.
ControlSample step(TransformedState& state, const Controller& controller,
                   const SteadyState& steady, const ScenarioConfig& cfg);

/// Full trajectory over [0, T]; T must be a whole number of steps.
OutputSeries simulate(const ScenarioConfig& cfg, const SteadyState& steady,
                      const Controller& controller, const DiagnosticsOptions& diag = {});

/// Builds the initial density field a scenario requests (used by both the
/// transformed simulation and the direct solver).
DensityField initial_density(const ScenarioConfig& cfg, const SteadyState& steady);

/// Builds the initial transformed state a scenario requests.
TransformedState initial_state(const ScenarioConfig& cfg, const SteadyState& steady,
                               SimMode mode);

}  // namespace larvae
