#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mpinv/measures.hpp"
#include "mpinv/numerics.hpp"

namespace mpinv {

// Strictness margin for inequalities that the theory states strictly.
inline constexpr double kStrictTol = 1e-12;

// Parameters of the damped fixed-point solvers.
struct FixedPointConfig {
    double tol = 1e-10;        // successive-iterate stopping tolerance
    std::size_t max_iter = 500;
    double damping_init = 1.0; // initial relaxation factor in (0, 1]

    void validate() const;
};

// Population-side model: spectral distribution H plus aspect ratio c = d/n.
struct ForwardModel {
    DiscreteMeasure H;
    double c;

    // Requires H to be a probability measure other than a point mass at 0,
    // and c > 0.
    ForwardModel(DiscreteMeasure H_in, double c_in);
};

// Solves the self-consistent spectral equation
//   s = integral dH(l) / ( l*(1 - c*z*s - c) - z )
// for the Stieltjes transform s_nu(z) of the limiting sample distribution,
// z in the upper half-plane.  Internally runs an adaptively damped
// fixed-point iteration on the companion transform u = c*s + (c-1)/z,
// whose map sends the upper half-plane strictly into itself and therefore
// converges to the unique admissible solution from any start (`start`
// seeds that iteration; default i/(1+|z|)).  The returned s satisfies the
// equation residual to within 10*tol and the solution-set constraint
// Im(c*s + (c-1)/z) > 0.
// Throws iteration_error on non-convergence, numerical_error if the
// constraint fails.
cpx solve_mp(const ForwardModel& model, cpx z, const FixedPointConfig& cfg = {},
             std::optional<cpx> start = {});

// Population-to-sample plane map Phi(z) = (1 - c*z*s_H(z) - c) * z.
// Accepts c >= 0 (c = 0 gives the identity map).
cpx phi_map(const DiscreteMeasure& H, double c, cpx z);

// Sample-to-population plane map phi(z) = -1 / s_companion(z), evaluated
// through a caller-supplied Stieltjes transform z -> s_nu(z).  Throws
// singularity_error if the companion transform vanishes.
cpx varphi_map(const std::function<cpx(cpx)>& nu_stieltjes, double c, cpx z);

// Result of the theoretical-domain test at a point.
struct DomainCheck {
    bool member = false;
    bool im_phi_positive = false;
    double ratio = 0.0;  // | c*z*Im(z*s_H(z)) / Im(Phi(z)) |
    cpx phi;
};

// Membership in the theoretical spectral domain with inversion-stability
// parameter theta in (0, inf]: requires Im(Phi(z)) > 0 and ratio < theta.
DomainCheck theoretical_domain_check(const ForwardModel& model, double theta, cpx z);
bool theoretical_domain_member(const ForwardModel& model, double theta, cpx z);

// Deterministic upper bound sigma^2 * (1 + sqrt(c))^2 for the top of the
// limiting sample support when the population spectrum is bounded by
// sigma^2.
double support_upper_bound(double sigma2, double c);

// Limiting sample density approximation Im(s_nu(x + i*eta))/pi on a grid.
// Evaluated in parallel; solver failures are reported with the grid index.
std::vector<double> density_grid(const ForwardModel& model,
                                 const std::vector<double>& xs, double eta,
                                 const FixedPointConfig& cfg = {});

}  // namespace mpinv
