#pragma once

#include <cstddef>
#include <vector>

#include "mpinv/mp_inverse.hpp"
#include "mpinv/numerics.hpp"

namespace mpinv {

// Closed real interval, used for user-supplied spectral support.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

enum class DomainMode {
    // The unobservable support-distance condition is replaced by distance to
    // the deterministic interval [0, sigma2*(1+sqrt(c_n))^2].
    ReplacementSafe,
    // Distance to caller-supplied support intervals.
    SupportSupplied,
};

struct DomainConfig {
    double tau = 0.05;
    double kappa = 10.0;
    double sigma2 = 1.0;
    bool sigma2_defaulted = false;  // set when sigma2 came from the heuristic
    DomainMode mode = DomainMode::ReplacementSafe;
    std::vector<Interval> nu_support;  // used in SupportSupplied mode

    void validate() const;
};

// ReplacementSafe config with the default variance heuristic
// sigma2 = (max sample eigenvalue) / (1 + sqrt(c_n))^2, flagged as defaulted.
DomainConfig default_domain_config(const SampleSpectrum& spec, double tau,
                                   double kappa);

// SupportSupplied config whose support is the observed sample range
// [min eigenvalue, max eigenvalue].
DomainConfig sample_support_config(const SampleSpectrum& spec, double tau,
                                   double kappa);

// Per-condition record of a membership evaluation.  Values that were never
// evaluated (short-circuited) are NaN.
struct MembershipDiagnostics {
    bool in_upper = false;        // Im(z) > 0
    double abs_z = 0.0;
    bool cond_modulus = false;    // tau < |z| < kappa

    bool cond_exists = false;
    FailureReason failure_reason = FailureReason::NoConvergence;
    std::size_t iterations = 0;
    double ratio = 0.0;

    cpx phi_hat;
    double abs_phi = 0.0;
    bool cond_phi_modulus = false;   // tau < |phi_hat| < kappa
    double dist_eigs = 0.0;
    bool cond_dist_eigs = false;     // dist(phi_hat, sample eigenvalues) > tau
    double dist_support = 0.0;
    bool cond_dist_support = false;  // mode-dependent support distance test

    double sigma2_used = 0.0;
    bool sigma2_defaulted = false;
};

struct MembershipResult {
    bool member = false;
    MembershipDiagnostics diag;
};

// Tests membership of z in the empirical spectral domain determined by the
// sample spectrum and the configuration.
MembershipResult membership(const SampleSpectrum& spec, const DomainConfig& cfg,
                            cpx z, const FixedPointConfig& fp = {});

// Axis-aligned evaluation window in the complex plane.
struct BoundingBox {
    double re_min, re_max;
    double im_min, im_max;
};

struct RasterCell {
    double re = 0.0, im = 0.0;
    bool member = false;
    double abs_phi = 0.0;
    double dist_eigs = 0.0;
    double dist_interval = 0.0;
    double ratio = 0.0;
};

// Row-major membership raster over cell centers: ny rows of nx cells,
// imaginary part increasing across rows, real part within a row.
struct RasterGrid {
    std::size_t nx = 0, ny = 0;
    std::vector<RasterCell> cells;
};

RasterGrid rasterize(const SampleSpectrum& spec, const DomainConfig& cfg,
                     const BoundingBox& bbox, std::size_t nx, std::size_t ny,
                     const FixedPointConfig& fp = {});

}  // namespace mpinv
