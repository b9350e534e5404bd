#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mpinv {

// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument or configuration supplied by the caller.
struct argument_error : error {
    using error::error;
};

// An evaluation point coincides with a point mass of a measure.
struct atom_collision_error : error {
    std::size_t atom_index;
    atom_collision_error(const std::string& msg, std::size_t idx)
        : error(msg), atom_index(idx) {}
};

// A fixed-point iteration failed to converge; carries the last iterate.
struct iteration_error : error {
    double residual;
    std::size_t iterations;
    iteration_error(const std::string& msg, double res, std::size_t its)
        : error(msg), residual(res), iterations(its) {}
};

// A denominator or other quantity became numerically singular.
struct singularity_error : error {
    using error::error;
};

// Linear algebra / numerical backend failure (e.g. eigensolver).
struct numerical_error : error {
    using error::error;
};

// Estimation requested at a point where the spectral estimator does not exist.
struct estimation_error : error {
    using error::error;
};

// File parsing / writing failure; carries a 1-based line number when known.
struct io_error : error {
    std::size_t line = 0;
    explicit io_error(const std::string& msg, std::size_t ln = 0)
        : error(msg), line(ln) {}
};

}  // namespace mpinv
