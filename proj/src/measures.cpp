#include "mpinv/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mpinv {

namespace {

// Sorts (atom, weight) pairs by atom and merges runs of atoms lying within
// kAtomMergeTol of the run's first (representative) atom.
void sort_and_merge(std::vector<double>& atoms, std::vector<double>& weights) {
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });

    std::vector<double> out_atoms;
    std::vector<double> out_weights;
    out_atoms.reserve(atoms.size());
    out_weights.reserve(atoms.size());
    for (std::size_t k : order) {
        if (!out_atoms.empty() && atoms[k] - out_atoms.back() < kAtomMergeTol) {
            out_weights.back() += weights[k];
        } else {
            out_atoms.push_back(atoms[k]);
            out_weights.push_back(weights[k]);
        }
    }
    atoms = std::move(out_atoms);
    weights = std::move(out_weights);
}

}  // namespace

DiscreteMeasure DiscreteMeasure::from_atoms(std::vector<double> atoms,
                                            std::vector<double> weights) {
    if (atoms.empty())
        throw argument_error("measure needs at least one atom");
    if (atoms.size() != weights.size())
        throw argument_error("atom/weight count mismatch: " + std::to_string(atoms.size()) +
                             " vs " + std::to_string(weights.size()));
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        if (!std::isfinite(atoms[j]) || atoms[j] < 0.0)
            throw argument_error("atom " + std::to_string(j) + " is negative or non-finite");
        if (!std::isfinite(weights[j]) || weights[j] <= 0.0)
            throw argument_error("weight " + std::to_string(j) + " must be positive and finite");
    }
    DiscreteMeasure m;
    m.atoms_ = std::move(atoms);
    m.weights_ = std::move(weights);
    sort_and_merge(m.atoms_, m.weights_);
    return m;
}

DiscreteMeasure DiscreteMeasure::from_eigenvalues(const std::vector<double>& evals) {
    if (evals.empty())
        throw argument_error("eigenvalue list is empty");
    std::vector<double> atoms(evals.size());
    for (std::size_t j = 0; j < evals.size(); ++j) {
        double v = evals[j];
        if (!std::isfinite(v) || v < kEigClampFloor)
            throw argument_error("eigenvalue " + std::to_string(j) +
                                 " is below the negative clamp floor");
        atoms[j] = std::max(v, 0.0);
    }
    std::vector<double> weights(evals.size(), 1.0 / static_cast<double>(evals.size()));
    DiscreteMeasure m;
    m.atoms_ = std::move(atoms);
    m.weights_ = std::move(weights);
    sort_and_merge(m.atoms_, m.weights_);
    return m;
}

DiscreteMeasure DiscreteMeasure::dirac(double at) {
    return from_atoms({at}, {1.0});
}

double DiscreteMeasure::total_mass() const {
    kahan_sum s;
    for (double w : weights_) s.add(w);
    return s.value();
}

bool DiscreteMeasure::is_probability() const {
    return std::abs(total_mass() - 1.0) <= kMassTol;
}

cpx stieltjes(const DiscreteMeasure& mu, cpx z) {
    kahan_csum s;
    const auto& atoms = mu.atoms();
    const auto& weights = mu.weights();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        cpx d = atoms[j] - z;
        if (d == cpx(0.0, 0.0))
            throw atom_collision_error("evaluation point equals atom " + std::to_string(j), j);
        s.add(weights[j] / d);
    }
    return s.value();
}

cpx stieltjes_deriv(const DiscreteMeasure& mu, cpx z, int order) {
    if (order != 1 && order != 2)
        throw argument_error("derivative order must be 1 or 2");
    kahan_csum s;
    const auto& atoms = mu.atoms();
    const auto& weights = mu.weights();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        cpx d = atoms[j] - z;
        if (d == cpx(0.0, 0.0))
            throw atom_collision_error("evaluation point equals atom " + std::to_string(j), j);
        cpx dk = d * d;
        if (order == 2) dk *= d;
        s.add(weights[j] / dk);
    }
    return (order == 1 ? 1.0 : 2.0) * s.value();
}

DiscreteMeasure underline_transform(const DiscreteMeasure& nu, double c) {
    if (!(c > 0.0))
        throw argument_error("aspect ratio c must be positive");
    if (c > 1.0)
        throw argument_error(
            "companion measure has no measure form for c > 1; "
            "use underline_stieltjes instead");
    if (c == 1.0) return nu;

    std::vector<double> atoms = nu.atoms();
    std::vector<double> weights = nu.weights();
    for (double& w : weights) w *= c;
    atoms.push_back(0.0);
    weights.push_back(1.0 - c);
    return DiscreteMeasure::from_atoms(std::move(atoms), std::move(weights));
}

cpx underline_stieltjes(const DiscreteMeasure& nu, double c, cpx z) {
    if (!(c > 0.0))
        throw argument_error("aspect ratio c must be positive");
    if (z == cpx(0.0, 0.0))
        throw atom_collision_error("evaluation point equals atom 0 of the companion measure", 0);
    return c * stieltjes(nu, z) - (1.0 - c) / z;
}

cpx underline_stieltjes_deriv(const DiscreteMeasure& nu, double c, cpx z, int order) {
    if (!(c > 0.0))
        throw argument_error("aspect ratio c must be positive");
    if (order != 1 && order != 2)
        throw argument_error("derivative order must be 1 or 2");
    if (z == cpx(0.0, 0.0))
        throw atom_collision_error("evaluation point equals atom 0 of the companion measure", 0);
    cpx base = c * stieltjes_deriv(nu, z, order);
    // d/dz [-(1-c)/z] = (1-c)/z^2 ; second derivative: -2(1-c)/z^3.
    if (order == 1) return base + (1.0 - c) / (z * z);
    return base - 2.0 * (1.0 - c) / (z * z * z);
}

double support_distance(const DiscreteMeasure& mu, cpx z) {
    double best = std::numeric_limits<double>::infinity();
    for (double a : mu.atoms()) best = std::min(best, std::abs(z - a));
    return best;
}

}  // namespace mpinv
