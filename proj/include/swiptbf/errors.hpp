// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace swiptbf {

/// Base class for solver failures (as opposed to misuse, which raises
/// std::invalid_argument / std::out_of_range).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The problem has no feasible point (SINR targets exceed the rank bound).
struct InfeasibleError : SolverError {
    using SolverError::SolverError;
};

/// Iteration caps hit or loss of numerical precision; never silently
/// downgraded to a wrong answer.
struct NumericalFailureError : SolverError {
    using SolverError::SolverError;
};

/// A relaxation covariance was not numerically rank one at extraction time.
struct RankOneViolation : SolverError {
    RankOneViolation(double r, const std::string& what) : SolverError(what), ratio(r) {}
    double ratio;
};

/// Zero-forcing requires N_t >= K and linearly independent channels.
struct ZfInapplicable : SolverError {
    using SolverError::SolverError;
};

/// Requested null space is empty (interfering channels span the full space).
struct NoNullSpaceError : SolverError {
    using SolverError::SolverError;
};

/// Fixed-point iteration did not reach its tolerance within the cap.
struct NotConvergedError : SolverError {
    using SolverError::SolverError;
};

/// Scaling quadratic has no valid root; signals invalid beamformer input.
struct DegenerateQuadratic : SolverError {
    using SolverError::SolverError;
};

}  // namespace swiptbf
