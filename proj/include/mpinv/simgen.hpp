#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpinv/estimators.hpp"
#include "mpinv/inference.hpp"

namespace mpinv {

enum class ModelKind { TwoAtomGaussian, RampRademacher, CustomDiag, FromFile };

// Seeded synthetic-data model.  TwoAtomGaussian: half the population
// eigenvalues at 1, half at 1/2, Gaussian entries, n defaulting to 20d.
// RampRademacher: half at 1/2 and half spread uniformly over (1/2, 1],
// conjugated by a Haar-random rotation, Rademacher entries, n defaulting
// to ceil(d/2).
struct ModelSpec {
    ModelKind kind = ModelKind::TwoAtomGaussian;
    std::size_t d = 0;
    std::size_t n = 0;  // 0 selects the kind-specific default
    std::uint64_t seed = 0;
    std::vector<double> custom_eigs;  // CustomDiag population eigenvalues
    std::string path;                 // FromFile data matrix (CSV)

    void validate() const;
    std::size_t effective_n() const;
};

struct GeneratedData {
    Eigen::MatrixXd Y;  // d x n data matrix
    // Exact population spectral measure; absent for FromFile data.
    std::optional<DiscreteMeasure> H_truth;
    std::vector<double> sigma_eigs;  // ascending population eigenvalues
};

// Deterministic in (spec.kind, d, n, seed): one generator stream per call,
// consumed in a documented order (RampRademacher: rotation Gaussians first,
// then data
// entries, column-major).
GeneratedData generate(const ModelSpec& spec);

// Eigenvalues of (1/n) Y Y^T through a symmetric eigensolver.
SampleSpectrum sample_spectrum(const Eigen::MatrixXd& Y);

// Haar-distributed orthogonal matrix: QR of an iid Gaussian matrix with the
// R-diagonal sign correction.
Eigen::MatrixXd haar_orthogonal(std::size_t d, std::uint64_t seed);

enum class McTaskKind { Plss, CiCoverage, Stieltjes };

// Replication-level estimation task for the Monte Carlo harness.
struct McTask {
    McTaskKind kind = McTaskKind::Plss;
    HoloFunction g;
    double curve_a = 0.2;
    double curve_b = 1.4;
    double curve_h = 0.5;
    std::size_t nodes = 64;  // per segment; CI uses (nodes, nodes + 8)
    double alpha = 0.05;
    int beta = 1;
    double tau = 0.05;
    double kappa = 10.0;
    // Validate the curve against the sample-support spectral domain before
    // estimating; inadmissible replications are flagged, not fatal.
    bool check_admissible = true;
    cpx stieltjes_point = cpx(1.0, 1.0);  // probe for the Stieltjes task
    FixedPointConfig fp;
};

// One Monte Carlo replication record.  Semantics per task:
//   Plss:        estimate = contour estimate, truth = population statistic,
//                error = estimate - truth.
//   CiCoverage:  estimate = 1 if the interval covered the truth else 0,
//                truth = population statistic, error = mu_n - truth.
//   Stieltjes:   estimate/truth = real parts at the probe point,
//                error = modulus of the complex mismatch.
struct McRow {
    std::size_t d = 0;
    std::size_t rep = 0;
    double estimate = 0.0;
    double truth = 0.0;
    double error = 0.0;
    double abs_error = 0.0;
    double runtime_s = 0.0;
    bool failed = false;
};

struct McTable {
    std::vector<McRow> rows;  // ordered by (family index, replication)
};

// Runs `reps` replications of the task for every model in the family.
// Replication r uses the derived seed splitmix(base_seed, r), so tables are
// reproducible and independent of the parallel schedule; per-replication
// failures are flagged rows rather than aborts.
McTable monte_carlo(const std::vector<ModelSpec>& family, const McTask& task,
                    std::size_t reps, std::uint64_t base_seed);

}  // namespace mpinv
