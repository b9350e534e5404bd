#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpinv/contours.hpp"
#include "mpinv/mp_inverse.hpp"

namespace mpinv {

// Holomorphic observable used under contour integrals.  Must map conjugates
// to conjugates (real-valued on the reals); validated at construction on a
// fixed probe set.
struct HoloFunction {
    std::string label;
    std::function<cpx(cpx)> fn;

    cpx operator()(cpx z) const { return fn(z); }
};

// Wraps and validates a holomorphic observable.
HoloFunction make_holo(std::string label, std::function<cpx(cpx)> fn);

// Named builtins: identity, square, cube, pow:k, exp, log, const:1.
HoloFunction builtin_holo(const std::string& name);

struct PlssEstimate {
    double value = 0.0;  // estimated population linear spectral statistic
    cpx raw;             // complex value before taking the real part
    std::size_t nodes = 0;
    PolylineCurve curve;
};

// Population linear-spectral-statistic estimator: contour integral of the
// estimated population Stieltjes transform against g over the curve and its
// mirror image.  Requires the estimator to exist at every node; offending
// node indices are reported otherwise via estimation_error.
PlssEstimate plss_estimate(const SampleSpectrum& spec, const HoloFunction& g,
                           const PolylineCurve& curve, const QuadratureRule& rule,
                           const FixedPointConfig& fp = {});

// Exact population statistic sum_{a < atom < b} weight * g(atom).
double plss_truth(const DiscreteMeasure& H, const HoloFunction& g, double a,
                  double b);

// Naive plug-in baseline: the same statistic evaluated on the sample
// spectrum instead of the population spectrum.
double plss_plugin_baseline(const SampleSpectrum& spec, const HoloFunction& g);

// Two-plane kernel of the generalized estimator, linking a population-side
// point z1 with a sample-side point zt2.
cpx glss_kernel(const SampleSpectrum& spec, cpx z1, cpx zt2,
                const FixedPointConfig& fp = {});

struct GlssEstimate {
    double value = 0.0;
    cpx raw;
    double imag_residue = 0.0;
};

// Generalized (two-function) spectral statistic estimator:
// (1/d) tr(f(S_n) g(Sigma_n)) for holomorphic f (sample side) and g
// (population side), via a double contour integral against the two-plane
// kernel.  curve_g runs in the population plane, curve_f in the sample
// plane; pass staggered node counts (e.g. 64 and 72) so node pairs never
// collide.
GlssEstimate glss_estimate(const SampleSpectrum& spec, const HoloFunction& f,
                           const HoloFunction& g, const PolylineCurve& curve_f,
                           const PolylineCurve& curve_g,
                           const QuadratureRule& rule_g,
                           const QuadratureRule& rule_f,
                           const FixedPointConfig& fp = {});

// Exact finite-dimensional reference for the generalized statistic:
// (1/d) sum_{j,k} f(l_j) 1[l_j in int_f] |u_j' v_k|^2 g(m_k) 1[m_k in int_g]
// from full eigendecompositions of the sample and population matrices.
double glss_truth(const Eigen::VectorXd& sample_eigs,
                  const Eigen::MatrixXd& sample_vecs,
                  const Eigen::VectorXd& pop_eigs,
                  const Eigen::MatrixXd& pop_vecs, const HoloFunction& f,
                  const HoloFunction& g, const Interval& int_f,
                  const Interval& int_g);

}  // namespace mpinv
