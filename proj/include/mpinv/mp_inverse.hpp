#pragma once

#include <functional>
#include <string>

#include "mpinv/measures.hpp"
#include "mpinv/mp_forward.hpp"
#include "mpinv/numerics.hpp"

namespace mpinv {

// Margin used for the strict existence inequalities of the inverse problem.
inline constexpr double kExistTol = 1e-12;

// Sample-side input: empirical spectral measure plus exact dimensions.
struct SampleSpectrum {
    DiscreteMeasure nu_hat;  // empirical spectral measure (mass 1)
    double c_n = 0.0;        // aspect ratio d/n
    std::size_t d = 0;       // matrix dimension (eigenvalue count before merging)
    std::size_t n = 0;       // sample count

    static SampleSpectrum from_eigenvalues(const std::vector<double>& evals,
                                           std::size_t n);
};

enum class FailureReason { None, NoConvergence, ImPhiNonPositive, RatioAtLeastOne };

std::string to_string(FailureReason r);

// Output of the population-transform estimator at a point z.  Non-existence
// is a value, not an exception.
struct InversionResult {
    cpx s_hat;          // estimated population Stieltjes transform
    cpx phi_hat;        // estimated plane map (1 - c_n*z*s_hat - c_n)*z
    std::size_t iterations = 0;
    double ratio = 0.0; // stability ratio; existence requires ratio < 1
    bool exists = false;
    FailureReason failure_reason = FailureReason::NoConvergence;
};

// The sample-side averaging operator T(v) = integral l/(l - w) dnu_hat(l)
// with w = (1 - c_n*v)*z.  Throws atom_collision_error if w hits an atom.
cpx t_operator(const SampleSpectrum& spec, cpx z, cpx v);

// Generic inverse fixed-point driver: iterates v -> 1 + w*s_nu(w),
// w = (1 - c*v)*z, from v_0 = i, with the same damping schedule as the
// forward solver.  `s_nu` must be defined off the real axis.  Any library
// error thrown by `s_nu` during iteration is treated as non-convergence.
InversionResult invert_with(const std::function<cpx(cpx)>& s_nu, double c,
                            cpx z, const FixedPointConfig& cfg = {});

// Population Stieltjes transform estimator at z in the upper half-plane.
InversionResult estimate_stieltjes(const SampleSpectrum& spec, cpx z,
                                   const FixedPointConfig& cfg = {});

// Canonical conjugate extension: for Im(z) < 0 returns the conjugate of the
// estimate at conj(z).  Throws argument_error on the real axis.
InversionResult estimate_stieltjes_ext(const SampleSpectrum& spec, cpx z,
                                       const FixedPointConfig& cfg = {});

// First and second derivative of the estimated plane map z -> phi_hat(z),
// computed analytically through the inverse-function relations of the
// sample-side map.  Valid on both half-planes off the real axis.
// Throws estimation_error where the estimator does not exist.
struct PhiHatDerivs {
    cpx d1;
    cpx d2;
};
PhiHatDerivs phi_hat_derivs(const SampleSpectrum& spec, cpx z,
                            const FixedPointConfig& cfg = {});

}  // namespace mpinv
