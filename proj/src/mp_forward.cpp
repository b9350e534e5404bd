#include "mpinv/mp_forward.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <numbers>
#include <string>

#include "damping.hpp"
#include "mpinv/parallel.hpp"

namespace mpinv {

void FixedPointConfig::validate() const {
    if (!(tol >= 1e-14))
        throw argument_error("fixed-point tolerance must be >= 1e-14");
    if (max_iter < 1)
        throw argument_error("max_iter must be >= 1");
    if (!(damping_init > 0.0 && damping_init <= 1.0))
        throw argument_error("damping_init must lie in (0, 1]");
}

ForwardModel::ForwardModel(DiscreteMeasure H_in, double c_in)
    : H(std::move(H_in)), c(c_in) {
    if (!H.is_probability())
        throw argument_error("population spectral measure must have total mass 1");
    if (H.size() == 1 && H.atoms()[0] == 0.0)
        throw argument_error("population spectral measure must not be a point mass at 0");
    if (!(c > 0.0) || !std::isfinite(c))
        throw argument_error("aspect ratio c must be positive and finite");
}

namespace {

// One evaluation of the self-consistent map
//   F(s) = integral dH(l) / ( l*(1 - c*z*s - c) - z ).
cpx mp_map(const DiscreteMeasure& H, double c, cpx z, cpx s) {
    cpx factor = 1.0 - c * z * s - c;
    kahan_csum acc;
    const auto& atoms = H.atoms();
    const auto& weights = H.weights();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        cpx denom = atoms[j] * factor - z;
        if (denom == cpx(0.0, 0.0))
            throw singularity_error("self-consistent map hit a singular denominator");
        acc.add(weights[j] / denom);
    }
    return acc.value();
}

// d/ds of mp_map, used by the Newton polish after the companion iteration.
cpx mp_map_deriv(const DiscreteMeasure& H, double c, cpx z, cpx s) {
    cpx factor = 1.0 - c * z * s - c;
    kahan_csum acc;
    const auto& atoms = H.atoms();
    const auto& weights = H.weights();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        cpx denom = atoms[j] * factor - z;
        acc.add(weights[j] * atoms[j] * c * z / (denom * denom));
    }
    return acc.value();
}

// Fixed-point map for the companion transform u = c*s + (c-1)/z:
//   G(u) = -1 / ( z - c * integral l/(1 + l*u) dH(l) ).
// For Im(z) > 0 and Im(u) > 0 the integral has nonpositive imaginary part,
// so Im(G(u)) >= Im(z)/|..|^2 > 0: G maps the upper half-plane strictly
// into itself and its iteration converges to the unique fixed point from
// any start.  The direct map F above lacks this property and can settle on
// roots of the equation outside the admissible set (seen for c > 1), which
// is why the solver iterates G and only uses F to verify.
cpx companion_map(const DiscreteMeasure& H, double c, cpx z, cpx u) {
    kahan_csum acc;
    const auto& atoms = H.atoms();
    const auto& weights = H.weights();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        cpx denom = 1.0 + atoms[j] * u;
        if (denom == cpx(0.0, 0.0))
            throw singularity_error("companion map hit a singular denominator");
        acc.add(weights[j] * atoms[j] / denom);
    }
    return -1.0 / (z - c * acc.value());
}

}  // namespace

cpx solve_mp(const ForwardModel& model, cpx z, const FixedPointConfig& cfg,
             std::optional<cpx> start) {
    cfg.validate();
    if (!(z.imag() > 0.0))
        throw argument_error("solve_mp requires Im(z) > 0");

    cpx u = start.value_or(cpx(0.0, 1.0) / (1.0 + std::abs(z)));
    if (!(u.imag() > 0.0))
        throw argument_error("starting point must lie in the upper half-plane");
    detail::DampingSchedule damping(cfg.damping_init);
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;

    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        cpx gu = companion_map(model.H, model.c, z, u);
        residual = std::abs(gu - u);
        if (residual <= cfg.tol) {
            u = gu;
            converged = true;
            break;
        }
        damping.observe(gu - u);
        u = (1.0 - damping.omega()) * u + damping.omega() * gu;
    }
    if (!converged)
        throw iteration_error("self-consistent solver did not converge", residual,
                              cfg.max_iter);

    // Map back to s and polish on the original equation: the back-map
    // divides the error by c, so small c would otherwise dilute the
    // companion tolerance.
    cpx s = (u - (model.c - 1.0) / z) / model.c;
    for (int k = 0; k < 8; ++k) {
        cpx r = mp_map(model.H, model.c, z, s) - s;
        if (std::abs(r) <= cfg.tol) break;
        cpx gprime = 1.0 - mp_map_deriv(model.H, model.c, z, s);
        if (gprime == cpx(0.0, 0.0)) break;
        s += r / gprime;
    }
    if (!(std::abs(mp_map(model.H, model.c, z, s) - s) <= cfg.tol * 10.0))
        throw numerical_error(
            "companion solution failed to meet the equation residual");

    // Solution-set constraint: Im(c*s + (c-1)/z) > 0.
    double margin = std::imag(model.c * s + (model.c - 1.0) / z);
    if (!(margin > kStrictTol))
        throw numerical_error(
            "converged iterate violates the solution-set constraint "
            "(Im margin " + std::to_string(margin) + ")");
    return s;
}

cpx phi_map(const DiscreteMeasure& H, double c, cpx z) {
    if (c < 0.0) throw argument_error("aspect ratio c must be nonnegative");
    if (c == 0.0) return z;
    return (1.0 - c * z * stieltjes(H, z) - c) * z;
}

cpx varphi_map(const std::function<cpx(cpx)>& nu_stieltjes, double c, cpx z) {
    if (!(c > 0.0)) throw argument_error("aspect ratio c must be positive");
    if (z == cpx(0.0, 0.0))
        throw argument_error("varphi_map is undefined at z = 0");
    cpx su = c * nu_stieltjes(z) - (1.0 - c) / z;
    if (std::abs(su) < 1e-300)
        throw singularity_error("companion Stieltjes transform vanishes");
    return -1.0 / su;
}

DomainCheck theoretical_domain_check(const ForwardModel& model, double theta, cpx z) {
    if (!(theta > 0.0))
        throw argument_error("theta must be positive (may be infinite)");
    cpx sH = stieltjes(model.H, z);
    cpx phi = (1.0 - model.c * z * sH - model.c) * z;

    DomainCheck chk;
    chk.phi = phi;
    chk.im_phi_positive = phi.imag() > 0.0;
    chk.ratio = chk.im_phi_positive
                    ? std::abs(model.c * z * std::imag(z * sH) / phi.imag())
                    : std::numeric_limits<double>::infinity();
    chk.member = chk.im_phi_positive && chk.ratio < theta;
    return chk;
}

bool theoretical_domain_member(const ForwardModel& model, double theta, cpx z) {
    return theoretical_domain_check(model, theta, z).member;
}

double support_upper_bound(double sigma2, double c) {
    if (!(sigma2 > 0.0)) throw argument_error("sigma2 must be positive");
    if (!(c >= 0.0)) throw argument_error("aspect ratio c must be nonnegative");
    double r = 1.0 + std::sqrt(c);
    return sigma2 * r * r;
}

std::vector<double> density_grid(const ForwardModel& model,
                                 const std::vector<double>& xs, double eta,
                                 const FixedPointConfig& cfg) {
    if (!(eta > 0.0)) throw argument_error("eta must be positive");
    std::vector<double> out(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        try {
            cpx s = solve_mp(model, cpx(xs[i], eta), cfg);
            out[i] = s.imag() / std::numbers::pi;
        } catch (const iteration_error& e) {
            throw iteration_error("density grid point " + std::to_string(i) +
                                      " (x = " + std::to_string(xs[i]) +
                                      "): " + e.what(),
                                  e.residual, e.iterations);
        } catch (const error& e) {
            throw numerical_error("density grid point " + std::to_string(i) +
                                  " (x = " + std::to_string(xs[i]) + "): " + e.what());
        }
    });
    return out;
}

}  // namespace mpinv
