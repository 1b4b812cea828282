#pragma once

#include <stdexcept>
#include <string>

namespace ustatgof {

// Thrown when a sample has too few observations for the requested kernel degree.
struct SampleTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a fit cannot proceed (all observations identical, zero variance).
struct DegenerateSample : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an iterative solver exhausts its budget without meeting tolerance.
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a Cholesky factorization of a matrix that must be positive
// definite (Sigma, R_U) fails.
struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a Monte Carlo expectation backend cannot meet the caller's
// standard-error bound.
struct BackendAccuracy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when the full-drift and reduced-drift vectors disagree, i.e. the
// supplied influence function is not of the maximum-likelihood/score type.
struct ReductionViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when exact U-statistic enumeration would exceed the practical
// subset budget (n choose nu > 1e7).
struct EnumerationBudget : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data file ingestion failure; carries the 1-based offending line.
struct ParseError : std::runtime_error {
    long line;
    ParseError(const std::string& msg, long line_number)
        : std::runtime_error(msg + " at line " + std::to_string(line_number)),
          line(line_number) {}
};

}  // namespace ustatgof
