#include "mpinv/inference.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "mpinv/errors.hpp"
#include "mpinv/parallel.hpp"

namespace mpinv {

namespace {

// Minimum separation of kernel arguments; below this the 1/(z1-z2)^2 term is
// numerically meaningless next to its analytic cancellation partner.
constexpr double kPairSeparationTol = 1e-8;

cpx bias_kernel(double c_n, int beta, const PhiHatDerivs& d) {
    if (beta == 2) return cpx(0.0, 0.0);
    if (std::abs(d.d1) < 1e-300)
        throw singularity_error("bias kernel: vanishing first derivative of the plane map");
    return -d.d2 / (2.0 * c_n * d.d1);
}

cpx covariance_kernel(double c_n, int beta, cpx z1, cpx phi1, cpx dphi1,
                      cpx z2, cpx phi2, cpx dphi2) {
    cpx dz = z1 - z2;
    if (std::abs(dz) < kPairSeparationTol)
        throw argument_error("covariance kernel requires |z1 - z2| >= 1e-8");
    cpx dphi = phi1 - phi2;
    if (std::abs(dphi) < 1e-300)
        throw singularity_error("covariance kernel: plane-map values coincide");
    cpx val = 1.0 / (dz * dz) - dphi1 * dphi2 / (dphi * dphi);
    return val / (static_cast<double>(beta) * c_n * c_n);
}

struct NodeCache {
    cpx z;
    cpx w;      // quadrature weight
    cpx g;      // g(z)
    cpx s;      // estimated population Stieltjes transform at z
    cpx phi;    // estimated plane map at z
    cpx dphi;   // its first derivative
    cpx ddphi;  // its second derivative
};

// Evaluate the estimator and plane-map derivatives at every node of a rule.
// Nodes where the estimate does not exist are collected and reported at once.
std::vector<NodeCache> evaluate_nodes(const SampleSpectrum& spec,
                                      const HoloFunction& g,
                                      const QuadratureRule& rule,
                                      const FixedPointConfig& fp,
                                      const char* which) {
    const std::size_t n = rule.nodes.size();
    std::vector<NodeCache> cache(n);
    std::vector<unsigned char> missing(n, 0);
    parallel_for(n, [&](std::size_t k) {
        cpx z = rule.nodes[k];
        InversionResult inv = estimate_stieltjes_ext(spec, z, fp);
        if (!inv.exists) {
            missing[k] = 1;
            return;
        }
        PhiHatDerivs d = phi_hat_derivs(spec, z, fp);
        cache[k] = NodeCache{z, rule.weights[k], g(z), inv.s_hat,
                             inv.phi_hat, d.d1, d.d2};
    });
    std::ostringstream bad;
    std::size_t n_bad = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!missing[k]) continue;
        if (n_bad < 8) bad << (n_bad ? ", " : "") << k;
        ++n_bad;
    }
    if (n_bad > 0) {
        std::ostringstream msg;
        msg << "confidence moments: estimator does not exist at " << n_bad
            << " node(s) of the " << which << " rule (indices " << bad.str()
            << (n_bad > 8 ? ", ..." : "") << ")";
        throw estimation_error(msg.str());
    }
    return cache;
}

}  // namespace

void CltConfig::validate() const {
    if (beta != 1 && beta != 2)
        throw argument_error("beta must be 1 (real data) or 2 (complex data)");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw argument_error("alpha must lie strictly inside (0, 1)");
}

cpx e_hat(const SampleSpectrum& spec, cpx z, int beta,
          const FixedPointConfig& fp) {
    if (beta != 1 && beta != 2)
        throw argument_error("beta must be 1 (real data) or 2 (complex data)");
    if (beta == 2) return cpx(0.0, 0.0);
    PhiHatDerivs d = phi_hat_derivs(spec, z, fp);
    return bias_kernel(spec.c_n, beta, d);
}

cpx c_hat(const SampleSpectrum& spec, cpx z1, cpx z2, int beta,
          const FixedPointConfig& fp) {
    if (beta != 1 && beta != 2)
        throw argument_error("beta must be 1 (real data) or 2 (complex data)");
    InversionResult i1 = estimate_stieltjes_ext(spec, z1, fp);
    InversionResult i2 = estimate_stieltjes_ext(spec, z2, fp);
    if (!i1.exists || !i2.exists)
        throw estimation_error("covariance kernel: estimator does not exist at a requested point");
    PhiHatDerivs d1 = phi_hat_derivs(spec, z1, fp);
    PhiHatDerivs d2 = phi_hat_derivs(spec, z2, fp);
    return covariance_kernel(spec.c_n, beta, z1, i1.phi_hat, d1.d1, z2,
                             i2.phi_hat, d2.d1);
}

cpx theoretical_e(const ForwardModel& model, int beta, cpx z) {
    if (beta != 1 && beta != 2)
        throw argument_error("beta must be 1 (real data) or 2 (complex data)");
    if (beta == 2) return cpx(0.0, 0.0);
    const DiscreteMeasure& H = model.H;
    const double c = model.c;
    cpx s = stieltjes(H, z);
    cpx s1 = stieltjes_deriv(H, z, 1);
    cpx s2 = stieltjes_deriv(H, z, 2);
    cpx dphi = (1.0 - c) - c * (2.0 * z * s + z * z * s1);
    cpx ddphi = -c * (2.0 * s + 4.0 * z * s1 + z * z * s2);
    if (std::abs(dphi) < 1e-300)
        throw singularity_error("bias kernel: vanishing first derivative of the plane map");
    return -ddphi / (2.0 * c * dphi);
}

cpx theoretical_c(const ForwardModel& model, int beta, cpx z1, cpx z2) {
    if (beta != 1 && beta != 2)
        throw argument_error("beta must be 1 (real data) or 2 (complex data)");
    const DiscreteMeasure& H = model.H;
    const double c = model.c;
    auto phi_d1 = [&](cpx z, cpx& phi, cpx& dphi) {
        cpx s = stieltjes(H, z);
        cpx s1 = stieltjes_deriv(H, z, 1);
        phi = (1.0 - c - c * z * s) * z;
        dphi = (1.0 - c) - c * (2.0 * z * s + z * z * s1);
    };
    cpx phi1, dphi1, phi2, dphi2;
    phi_d1(z1, phi1, dphi1);
    phi_d1(z2, phi2, dphi2);
    return covariance_kernel(c, beta, z1, phi1, dphi1, z2, phi2, dphi2);
}

CiMoments ci_moments(const SampleSpectrum& spec, const HoloFunction& g,
                     const PolylineCurve& curve, const QuadratureRule& rule1,
                     const QuadratureRule& rule2, int beta,
                     const FixedPointConfig& fp) {
    if (beta != 1 && beta != 2)
        throw argument_error("beta must be 1 (real data) or 2 (complex data)");
    fp.validate();
    (void)curve;
    if (rule1.nodes.empty() || rule2.nodes.empty())
        throw argument_error("confidence moments require non-empty quadrature rules");
    if (rule1.nodes_per_segment == rule2.nodes_per_segment)
        throw argument_error("confidence moments require staggered rules of different orders");

    const double n = static_cast<double>(spec.n);
    const double c_n = spec.c_n;

    std::vector<NodeCache> p = evaluate_nodes(spec, g, rule1, fp, "outer");
    std::vector<NodeCache> q = evaluate_nodes(spec, g, rule2, fp, "inner");

    // Statistic estimate and bias correction walk the closed contour made of
    // the rule and its mirror image; mirrored nodes carry conjugate weights,
    // so both reduce to imaginary parts of upper-half sums.
    kahan_csum S_g;
    kahan_csum S_e;
    for (const NodeCache& nc : p) {
        S_g.add(nc.w * nc.g * nc.s);
        if (beta == 1)
            S_e.add(nc.w * nc.g *
                    bias_kernel(c_n, beta, PhiHatDerivs{nc.dphi, nc.ddphi}));
    }
    const double L_hat = -S_g.value().imag() / M_PI;
    const double mu_n = L_hat + (beta == 1 ? S_e.value().imag() / (M_PI * n) : 0.0);

    // Variance of the limiting Gaussian: the closed-contour double integral
    // of the covariance kernel splits into a mixed term (one argument
    // reflected, conjugate weight) minus an aligned term (both upper).
    kahan_csum T_mixed;
    kahan_csum T_aligned;
    for (const NodeCache& a : p) {
        kahan_csum row_mixed;
        kahan_csum row_aligned;
        for (const NodeCache& b : q) {
            cpx k_mixed = covariance_kernel(c_n, beta, a.z, a.phi, a.dphi,
                                            std::conj(b.z), std::conj(b.phi),
                                            std::conj(b.dphi));
            cpx k_aligned = covariance_kernel(c_n, beta, a.z, a.phi, a.dphi,
                                              b.z, b.phi, b.dphi);
            row_mixed.add(std::conj(b.w) * std::conj(b.g) * k_mixed);
            row_aligned.add(b.w * b.g * k_aligned);
        }
        T_mixed.add(a.w * a.g * row_mixed.value());
        T_aligned.add(a.w * a.g * row_aligned.value());
    }
    double sigma2 =
        (T_mixed.value() - T_aligned.value()).real() / (M_PI * M_PI * n * n);

    CiMoments out;
    out.L_hat = L_hat;
    out.mu_n = mu_n;
    out.clamped = false;
    if (sigma2 < 0.0) {
        if (sigma2 <= -1e-12)
            throw numerical_error("confidence moments produced a negative variance estimate");
        sigma2 = 0.0;
        out.clamped = true;
    }
    out.sigma2_n = sigma2;
    return out;
}

CiResult confidence_interval(const SampleSpectrum& spec, const HoloFunction& g,
                             const PolylineCurve& curve,
                             const QuadratureRule& rule1,
                             const QuadratureRule& rule2, const CltConfig& ccfg,
                             const FixedPointConfig& fp) {
    ccfg.validate();
    CiMoments m = ci_moments(spec, g, curve, rule1, rule2, ccfg.beta, fp);
    const double sd = std::sqrt(m.sigma2_n);
    const double qhi = gaussian_quantile(1.0 - ccfg.alpha / 2.0);
    CiResult out;
    out.estimate = m.L_hat;
    out.mu_n = m.mu_n;
    out.sigma2_n = m.sigma2_n;
    out.lo = m.mu_n - qhi * sd;
    out.hi = m.mu_n + qhi * sd;
    out.alpha = ccfg.alpha;
    out.beta = ccfg.beta;
    return out;
}

double gaussian_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw argument_error("quantile level must lie strictly inside (0, 1)");
    // Rational initializer (relative error ~1e-9), then one Newton step on
    // the exact CDF expressed through erfc.
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double cdf = 0.5 * std::erfc(-x / std::sqrt(2.0));
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf > 0.0) x -= (cdf - p) / pdf;
    return x;
}

}  // namespace mpinv
