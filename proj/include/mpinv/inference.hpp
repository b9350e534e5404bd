#pragma once

#include "mpinv/estimators.hpp"

namespace mpinv {

struct CltConfig {
    int beta = 1;         // 1 for real-valued data, 2 for complex-valued data
    double alpha = 0.05;  // two-sided miscoverage level

    void validate() const;
};

// Estimated bias kernel at z (conjugate extension allowed):
//   -1[beta=1] * phi_hat''(z) / (2 c_n phi_hat'(z)).
cpx e_hat(const SampleSpectrum& spec, cpx z, int beta,
          const FixedPointConfig& fp = {});

// Estimated covariance kernel at a pair of points, |z1 - z2| >= 1e-8:
//   (1/(beta c_n^2)) * ( 1/(z1-z2)^2
//                        - phi_hat'(z1) phi_hat'(z2)/(phi_hat(z1)-phi_hat(z2))^2 ).
cpx c_hat(const SampleSpectrum& spec, cpx z1, cpx z2, int beta,
          const FixedPointConfig& fp = {});

// Deterministic counterparts computed from a population-side model.
cpx theoretical_e(const ForwardModel& model, int beta, cpx z);
cpx theoretical_c(const ForwardModel& model, int beta, cpx z1, cpx z2);

struct CiMoments {
    double L_hat = 0.0;     // plain statistic estimate
    double mu_n = 0.0;      // bias-corrected center
    double sigma2_n = 0.0;  // variance estimate of the statistic
    bool clamped = false;   // sigma2_n was a tiny negative clamped to zero
};

// First two moments of the Gaussian approximation to the estimator of the
// population statistic: bias-corrected center mu_n and variance sigma2_n.
// rule1/rule2 must be staggered rules (different orders) over the same
// curve so that covariance-kernel evaluations never hit the diagonal.
CiMoments ci_moments(const SampleSpectrum& spec, const HoloFunction& g,
                     const PolylineCurve& curve, const QuadratureRule& rule1,
                     const QuadratureRule& rule2, int beta,
                     const FixedPointConfig& fp = {});

struct CiResult {
    double estimate = 0.0;  // plain statistic estimate
    double mu_n = 0.0;
    double sigma2_n = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double alpha = 0.0;
    int beta = 1;
};

// Two-sided confidence interval for the population statistic:
//   [ mu_n + sqrt(sigma2_n) Q(alpha/2), mu_n + sqrt(sigma2_n) Q(1-alpha/2) ].
CiResult confidence_interval(const SampleSpectrum& spec, const HoloFunction& g,
                             const PolylineCurve& curve,
                             const QuadratureRule& rule1,
                             const QuadratureRule& rule2, const CltConfig& ccfg,
                             const FixedPointConfig& fp = {});

// Standard normal quantile, p in (0, 1); rational approximation refined by a
// Newton step on the exact CDF, absolute error well below 1e-8.
double gaussian_quantile(double p);

}  // namespace mpinv
