#include "mpinv/mp_inverse.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "damping.hpp"

namespace mpinv {

SampleSpectrum SampleSpectrum::from_eigenvalues(const std::vector<double>& evals,
                                                std::size_t n) {
    if (n == 0) throw argument_error("sample count n must be positive");
    SampleSpectrum s;
    s.nu_hat = DiscreteMeasure::from_eigenvalues(evals);
    s.d = evals.size();
    s.n = n;
    s.c_n = static_cast<double>(s.d) / static_cast<double>(n);
    return s;
}

std::string to_string(FailureReason r) {
    switch (r) {
        case FailureReason::None: return "None";
        case FailureReason::NoConvergence: return "NoConvergence";
        case FailureReason::ImPhiNonPositive: return "ImPhiNonPositive";
        case FailureReason::RatioAtLeastOne: return "RatioAtLeastOne";
    }
    return "Unknown";
}

cpx t_operator(const SampleSpectrum& spec, cpx z, cpx v) {
    cpx w = (1.0 - spec.c_n * v) * z;
    kahan_csum acc;
    const auto& atoms = spec.nu_hat.atoms();
    const auto& weights = spec.nu_hat.weights();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        cpx denom = atoms[j] - w;
        if (denom == cpx(0.0, 0.0))
            throw atom_collision_error(
                "averaging operator hit sample atom " + std::to_string(j), j);
        acc.add(atoms[j] * weights[j] / denom);
    }
    return acc.value();
}

namespace {

InversionResult run_inversion(const std::function<cpx(cpx)>& T, double c, cpx z,
                              const FixedPointConfig& cfg) {
    cfg.validate();
    if (!(z.imag() > 0.0))
        throw argument_error("inverse estimator requires Im(z) > 0");

    InversionResult res;
    cpx v = cpx(0.0, 1.0);
    detail::DampingSchedule damping(cfg.damping_init);
    bool converged = false;
    cpx v_star = v;

    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        cpx tv;
        try {
            tv = T(v);
        } catch (const error&) {
            res.iterations = it + 1;
            res.s_hat = (v - 1.0) / z;
            res.phi_hat = (1.0 - c * v) * z;
            res.exists = false;
            res.failure_reason = FailureReason::NoConvergence;
            res.ratio = std::numeric_limits<double>::quiet_NaN();
            return res;
        }
        double residual = std::abs(tv - v);
        res.iterations = it + 1;
        if (residual <= cfg.tol) {
            converged = true;
            v_star = tv;
            break;
        }
        damping.observe(tv - v);
        v = (1.0 - damping.omega()) * v + damping.omega() * tv;
    }
    if (!converged) v_star = v;

    res.s_hat = (v_star - 1.0) / z;
    res.phi_hat = (1.0 - c * v_star) * z;
    double im_phi = res.phi_hat.imag();
    res.ratio = im_phi != 0.0
                    ? std::abs(c * z * v_star.imag() / im_phi)
                    : std::numeric_limits<double>::infinity();

    if (!converged) {
        res.exists = false;
        res.failure_reason = FailureReason::NoConvergence;
    } else if (!(im_phi > kExistTol)) {
        res.exists = false;
        res.failure_reason = FailureReason::ImPhiNonPositive;
    } else if (!(res.ratio < 1.0 - kExistTol)) {
        res.exists = false;
        res.failure_reason = FailureReason::RatioAtLeastOne;
    } else if (!(res.s_hat.imag() > 0.0)) {
        // Theory excludes this for converged iterates passing the two
        // existence conditions; treat a numerical violation as a failed run.
        res.exists = false;
        res.failure_reason = FailureReason::NoConvergence;
    } else {
        res.exists = true;
        res.failure_reason = FailureReason::None;
    }
    return res;
}

}  // namespace

InversionResult invert_with(const std::function<cpx(cpx)>& s_nu, double c, cpx z,
                            const FixedPointConfig& cfg) {
    if (!(c > 0.0)) throw argument_error("aspect ratio c must be positive");
    auto T = [&](cpx v) {
        cpx w = (1.0 - c * v) * z;
        return 1.0 + w * s_nu(w);
    };
    return run_inversion(T, c, z, cfg);
}

InversionResult estimate_stieltjes(const SampleSpectrum& spec, cpx z,
                                   const FixedPointConfig& cfg) {
    auto T = [&](cpx v) { return t_operator(spec, z, v); };
    return run_inversion(T, spec.c_n, z, cfg);
}

InversionResult estimate_stieltjes_ext(const SampleSpectrum& spec, cpx z,
                                       const FixedPointConfig& cfg) {
    if (z.imag() > 0.0) return estimate_stieltjes(spec, z, cfg);
    if (z.imag() < 0.0) {
        InversionResult r = estimate_stieltjes(spec, std::conj(z), cfg);
        r.s_hat = std::conj(r.s_hat);
        r.phi_hat = std::conj(r.phi_hat);
        return r;
    }
    throw argument_error("conjugate extension is undefined on the real axis");
}

PhiHatDerivs phi_hat_derivs(const SampleSpectrum& spec, cpx z,
                            const FixedPointConfig& cfg) {
    if (z.imag() == 0.0)
        throw argument_error("plane-map derivatives are undefined on the real axis");
    if (z.imag() < 0.0) {
        PhiHatDerivs up = phi_hat_derivs(spec, std::conj(z), cfg);
        return {std::conj(up.d1), std::conj(up.d2)};
    }

    InversionResult inv = estimate_stieltjes(spec, z, cfg);
    if (!inv.exists)
        throw estimation_error("population transform estimate does not exist at the "
                               "requested point (" + to_string(inv.failure_reason) + ")");

    cpx zt = inv.phi_hat;
    cpx g = underline_stieltjes(spec.nu_hat, spec.c_n, zt);
    cpx g1 = underline_stieltjes_deriv(spec.nu_hat, spec.c_n, zt, 1);
    cpx g2 = underline_stieltjes_deriv(spec.nu_hat, spec.c_n, zt, 2);
    if (std::abs(g) < 1e-300)
        throw singularity_error("companion transform vanishes at the mapped point");

    // varphi = -1/g, so varphi' = g'/g^2 and varphi'' = g''/g^2 - 2 g'^2/g^3.
    cpx g_sq = g * g;
    cpx vphi1 = g1 / g_sq;
    cpx vphi2 = g2 / g_sq - 2.0 * g1 * g1 / (g_sq * g);
    if (std::abs(vphi1) < 1e-300)
        throw singularity_error("sample-side map is critical at the mapped point");

    PhiHatDerivs out;
    out.d1 = 1.0 / vphi1;
    out.d2 = -vphi2 * out.d1 * out.d1 * out.d1;
    return out;
}

}  // namespace mpinv
