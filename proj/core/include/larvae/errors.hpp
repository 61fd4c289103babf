#pragma once

#include <stdexcept>
#include <string>

namespace larvae {

/// Bad input: unreadable files, schema violations, out-of-range parameters,
/// rejected hypotheses. Maps to process exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure of the numerics themselves: divergence, missing equilibrium,
/// infeasible feedforward. Maps to process exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace larvae
