#pragma once

#include <stdexcept>
#include <string>

namespace qpr {

// Bad model construction parameters (site count below minimum, odd chain
// length where an even one is required, ...).
struct InvalidModelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Operands with incompatible qubit counts or vector lengths.
struct SizeMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Request exceeds a documented resource ceiling (2^n too large, reduced
// density matrix over too many sites, too many circuit parameters).
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical consistency check failed (imaginary residue above tolerance,
// normalization drift).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An iterative procedure failed to make progress (ITE step rejected after
// all retries, ground-state tracking lost the state).
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear solve failed (singular system even after regularization).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values appeared during training.
struct TrainingDivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Classifier thresholds violate t2 <= t1.
struct InvalidThresholdError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed experiment configuration or unresolvable referenced file.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qpr
