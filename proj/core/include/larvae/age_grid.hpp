#pragma once

#include "larvae/errors.hpp"

namespace larvae {

/// Uniform grid over the age interval (0, A). Nodes sit at a_j = j*da,
/// j = 0..intervals. The simulation time step is tied to da so that delay
/// reads never interpolate.
struct AgeGrid {
    double max_age = 0.0;
    int intervals = 0;

    double spacing() const { return max_age / intervals; }
    int nodes() const { return intervals + 1; }
    double node(int j) const { return spacing() * static_cast<double>(j); }

    void validate() const {
        if (!(max_age > 0.0))
            throw ValidationError("age_grid: max_age must be positive");
        if (intervals < 8)
            throw ValidationError("age_grid: at least 8 intervals required");
    }
};

}  // namespace larvae
