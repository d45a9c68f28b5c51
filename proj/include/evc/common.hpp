#pragma once

#include <stdexcept>
#include <string>
#include <cstddef>

namespace evc {

// Global tolerance constants. Single source of truth for exact-algebra
// identities, quadrature oracles, and rank decisions.
struct Tolerances {
    double exact = 1e-12;        // algebraic identities at double precision
    double quad_oracle = 1e-8;   // closed form vs numeric quadrature
    double quad_abs = 1e-10;     // absolute tolerance of the adaptive quadrature
    double rank_rel = 1e-10;     // relative eigenvalue threshold for S
    double fd = 1e-6;            // finite-difference cross-checks
};

inline const Tolerances& tol() {
    static const Tolerances t;
    return t;
}

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad mathematical input (out-of-range argument, negative weight, ...).
struct DomainError : Error { using Error::Error; };
struct DimensionMismatch : DomainError { using DomainError::DomainError; };
struct OutOfRange : DomainError { using DomainError::DomainError; };
struct InvalidTheta : DomainError { using DomainError::DomainError; };

// Model degeneracy.
struct DegenerateColumn : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct SingularDesign : Error { using Error::Error; };
struct SingularEndpointCovariance : Error { using Error::Error; };
struct ZeroXi : Error { using Error::Error; };
struct UnsupportedModel : Error { using Error::Error; };
struct MissingCovariance : Error { using Error::Error; };

// Sampler internal-consistency failures; both indicate a construction bug.
struct EnvelopeViolation : Error { using Error::Error; };
struct InvalidP : Error { using Error::Error; };

// I/O and configuration.
struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct ParseError : Error {
    std::size_t row = 0, col = 0;
    ParseError(const std::string& msg, std::size_t r, std::size_t c)
        : Error(msg), row(r), col(c) {}
};

}  // namespace evc
