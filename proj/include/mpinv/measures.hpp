#pragma once

#include <cstddef>
#include <vector>

#include "mpinv/errors.hpp"
#include "mpinv/numerics.hpp"

namespace mpinv {

// Atoms closer than this are merged into a single point mass.
inline constexpr double kAtomMergeTol = 1e-12;
// Eigenvalues in [kEigClampFloor, 0) are treated as numerical zeros.
inline constexpr double kEigClampFloor = -1e-10;
// Tolerance for the probability-measure check |mass - 1|.
inline constexpr double kMassTol = 1e-12;

// Finite discrete measure on [0, inf): sorted atom locations with positive
// weights.  Construction goes through the factories, which sort, validate and
// merge near-duplicate atoms.
class DiscreteMeasure {
  public:
    // Default-constructed measures are empty; validated instances come from
    // the factories below.
    DiscreteMeasure() = default;

    // Builds a measure from location/weight pairs.  Throws argument_error on
    // size mismatch, empty input, negative atoms or non-positive weights.
    static DiscreteMeasure from_atoms(std::vector<double> atoms,
                                      std::vector<double> weights);

    // Builds the empirical spectral measure of an eigenvalue list: uniform
    // weight 1/d per value.  Values in [kEigClampFloor, 0) are clamped to
    // zero; anything below kEigClampFloor is rejected.
    static DiscreteMeasure from_eigenvalues(const std::vector<double>& evals);

    // Point mass at `at` with weight one.
    static DiscreteMeasure dirac(double at);

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return atoms_.size(); }

    double total_mass() const;
    bool is_probability() const;

  private:
    std::vector<double> atoms_;
    std::vector<double> weights_;
};

// Stieltjes transform s_mu(z) = sum_j w_j / (atom_j - z), compensated
// summation.  Throws atom_collision_error if z coincides with an atom.
cpx stieltjes(const DiscreteMeasure& mu, cpx z);

// Derivative of the Stieltjes transform, order in {1, 2}:
// order! * sum_j w_j / (atom_j - z)^(order+1).
cpx stieltjes_deriv(const DiscreteMeasure& mu, cpx z, int order);

// Companion measure c*nu + (1-c)*delta_0 in measure form.  Requires
// 0 < c <= 1; for c > 1 the companion is only available through the
// Stieltjes identity (underline_stieltjes below), and this throws.
DiscreteMeasure underline_transform(const DiscreteMeasure& nu, double c);

// Stieltjes transform of the companion measure via the identity
// s_underline(z) = c * s_nu(z) - (1 - c)/z, valid for any c > 0.
cpx underline_stieltjes(const DiscreteMeasure& nu, double c, cpx z);

// Derivative (order in {1, 2}) of underline_stieltjes in z.
cpx underline_stieltjes_deriv(const DiscreteMeasure& nu, double c, cpx z,
                              int order);

// min_j |z - atom_j|.
double support_distance(const DiscreteMeasure& mu, cpx z);

}  // namespace mpinv
