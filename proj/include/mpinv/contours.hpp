#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mpinv/domain.hpp"
#include "mpinv/numerics.hpp"

namespace mpinv {

// Default height below which quadrature nodes are not placed; slivers of
// segments below it are folded into the adjacent node weight.
inline constexpr double kDefaultEtaFloor = 1e-8;

// Open polyline in the closed upper half-plane running from the real point b
// to the real point a (a < b); interior vertices lie strictly above the real
// axis.  Together with its mirror image it encloses the interval (a, b).
struct PolylineCurve {
    std::vector<cpx> vertices;
    double a = 0.0;
    double b = 0.0;

    // Validates and builds a curve from an ordered vertex list.
    static PolylineCurve create(std::vector<cpx> vertices);
};

// Rectangle-shaped curve: b -> b+ih -> a+ih -> a.
PolylineCurve rectangle_curve(double a, double b, double h);

// Sum of segment lengths.
double curve_length(const PolylineCurve& curve);

// Complex line-integral rule along a curve: fixed-order Gauss-Legendre per
// segment.  Weights carry the segment direction, so sum(weights) telescopes
// to (a - b).
struct QuadratureRule {
    std::vector<cpx> nodes;
    std::vector<cpx> weights;
    std::size_t nodes_per_segment = 0;
    double eta_floor = kDefaultEtaFloor;
};

// Gauss-Legendre abscissas/weights on [0, 1].
void gauss_legendre_01(std::size_t n, std::vector<double>& x,
                       std::vector<double>& w);

QuadratureRule quadrature(const PolylineCurve& curve,
                          std::size_t nodes_per_segment = 64,
                          double eta_floor = kDefaultEtaFloor);

// Evaluates sum_k weights[k] * f(nodes[k]) with compensated summation.
template <typename F>
cpx integrate(const QuadratureRule& rule, F&& f) {
    kahan_csum acc;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        acc.add(rule.weights[k] * f(rule.nodes[k]));
    return acc.value();
}

struct NodeFailure {
    std::size_t node_index = 0;
    cpx z;
    MembershipDiagnostics diag;
};

struct AdmissibilityReport {
    bool admissible = false;
    std::vector<NodeFailure> failures;
};

// Curve admissibility: every quadrature node must belong to the empirical
// spectral domain.
AdmissibilityReport validate_admissible(const PolylineCurve& curve,
                                        const SampleSpectrum& spec,
                                        const DomainConfig& cfg,
                                        const QuadratureRule& rule,
                                        const FixedPointConfig& fp = {});

// Smallest height from `h_grid` whose rectangle over (a, b) is admissible.
std::optional<PolylineCurve> auto_height(double a, double b,
                                         const SampleSpectrum& spec,
                                         const DomainConfig& cfg,
                                         const FixedPointConfig& fp,
                                         const std::vector<double>& h_grid);

// Nearest point of the grid { k / n^K : k integer } with ties toward -inf.
double snap_to_grid(double x, std::size_t n, std::size_t K);

// Validation report for a two-curve (population-side, sample-side) pair.
struct PairReport {
    bool ok = false;
    bool curve_g_admissible = false;
    std::vector<NodeFailure> g_failures;
    bool endpoints_on_grid = false;
    // Sample-side node indices violating the modulus / support-distance /
    // mapped-modulus conditions.
    std::vector<std::size_t> f_node_failures;
    double min_separation = 0.0;  // min |z_g - varphi(z_f)| over node pairs
    bool separation_ok = false;
};

// Checks a (curve_g, curve_f) pair: curve_g admissible with endpoints on the
// snap grid of exponent K; curve_f inside the kappa-ball, tau-separated from
// the sample support and {0}, with the sample-to-population map staying in
// the [tau, kappa] modulus band; and the mapped sample curve tau-separated
// from curve_g.
PairReport validate_pair(const PolylineCurve& curve_g,
                         const PolylineCurve& curve_f,
                         const SampleSpectrum& spec, const DomainConfig& cfg,
                         std::size_t K, const FixedPointConfig& fp = {});

}  // namespace mpinv
