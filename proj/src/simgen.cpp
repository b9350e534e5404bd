#include "mpinv/simgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "mpinv/errors.hpp"
#include "mpinv/io.hpp"
#include "mpinv/parallel.hpp"

namespace mpinv {

namespace {

Eigen::MatrixXd haar_from_rng(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd G(d, d);
    for (Eigen::Index j = 0; j < G.cols(); ++j)
        for (Eigen::Index i = 0; i < G.rows(); ++i) G(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ();
    Eigen::MatrixXd R = qr.matrixQR();
    for (Eigen::Index j = 0; j < Q.cols(); ++j)
        if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
    return Q;
}

void fill_gaussian(Eigen::MatrixXd& X, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, j) = normal(rng);
}

void fill_rademacher(Eigen::MatrixXd& X, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coin(0, 1);
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            X(i, j) = coin(rng) ? 1.0 : -1.0;
}

}  // namespace

void ModelSpec::validate() const {
    switch (kind) {
        case ModelKind::TwoAtomGaussian:
        case ModelKind::RampRademacher:
            if (d < 1) throw argument_error("model dimension d must be >= 1");
            break;
        case ModelKind::CustomDiag:
            if (custom_eigs.empty())
                throw argument_error("CustomDiag model requires population eigenvalues");
            if (d != 0 && d != custom_eigs.size())
                throw argument_error("CustomDiag dimension disagrees with the eigenvalue count");
            for (double v : custom_eigs)
                if (!(v >= 0.0) || !std::isfinite(v))
                    throw argument_error("population eigenvalues must be finite and nonnegative");
            break;
        case ModelKind::FromFile:
            if (path.empty())
                throw argument_error("FromFile model requires a data path");
            break;
    }
}

std::size_t ModelSpec::effective_n() const {
    if (n > 0) return n;
    std::size_t dim = (kind == ModelKind::CustomDiag && d == 0)
                          ? custom_eigs.size()
                          : d;
    switch (kind) {
        case ModelKind::TwoAtomGaussian:
        case ModelKind::CustomDiag:
            return 20 * dim;
        case ModelKind::RampRademacher:
            return (dim + 1) / 2;
        case ModelKind::FromFile:
            return 0;  // determined by the file contents
    }
    return 0;
}

GeneratedData generate(const ModelSpec& spec) {
    spec.validate();
    GeneratedData out;

    if (spec.kind == ModelKind::FromFile) {
        out.Y = read_matrix_csv(spec.path);
        return out;
    }

    std::vector<double> sigma_eigs;
    const std::size_t d =
        (spec.kind == ModelKind::CustomDiag && spec.d == 0)
            ? spec.custom_eigs.size()
            : spec.d;
    const std::size_t n = spec.effective_n();
    if (n < 1) throw argument_error("sample count n must be >= 1");

    std::mt19937_64 rng(spec.seed);
    Eigen::MatrixXd X(d, n);

    switch (spec.kind) {
        case ModelKind::TwoAtomGaussian: {
            // Population spectrum: 1 with multiplicity ceil(d/2), then 1/2.
            const std::size_t ones = (d + 1) / 2;
            fill_gaussian(X, rng);
            const double root_half = std::sqrt(0.5);
            for (std::size_t i = ones; i < d; ++i)
                X.row(static_cast<Eigen::Index>(i)) *= root_half;
            out.Y = std::move(X);
            sigma_eigs.assign(d - ones, 0.5);
            sigma_eigs.insert(sigma_eigs.end(), ones, 1.0);
            break;
        }
        case ModelKind::RampRademacher: {
            // Population spectrum: 1/2 with multiplicity floor(d/2), then
            // 1/2 + j/d for j = 1..ceil(d/2), conjugated by a Haar rotation.
            // Stream order: rotation Gaussians first, then data entries.
            Eigen::MatrixXd V = haar_from_rng(d, rng);
            fill_rademacher(X, rng);
            const std::size_t halves = d / 2;
            sigma_eigs.assign(halves, 0.5);
            for (std::size_t j = 1; j <= d - halves; ++j)
                sigma_eigs.push_back(0.5 + static_cast<double>(j) /
                                               static_cast<double>(d));
            Eigen::VectorXd scale(d);
            for (std::size_t i = 0; i < d; ++i)
                scale(static_cast<Eigen::Index>(i)) = std::sqrt(sigma_eigs[i]);
            out.Y = V * scale.asDiagonal() * X;
            break;
        }
        case ModelKind::CustomDiag: {
            fill_gaussian(X, rng);
            sigma_eigs = spec.custom_eigs;
            std::sort(sigma_eigs.begin(), sigma_eigs.end());
            for (std::size_t i = 0; i < d; ++i)
                X.row(static_cast<Eigen::Index>(i)) *=
                    std::sqrt(spec.custom_eigs[i]);
            out.Y = std::move(X);
            break;
        }
        case ModelKind::FromFile:
            break;  // handled above
    }

    out.H_truth = DiscreteMeasure::from_eigenvalues(sigma_eigs);
    out.sigma_eigs = std::move(sigma_eigs);
    return out;
}

SampleSpectrum sample_spectrum(const Eigen::MatrixXd& Y) {
    const Eigen::Index d = Y.rows();
    const Eigen::Index n = Y.cols();
    if (d < 1 || n < 1)
        throw argument_error("data matrix must have at least one row and column");
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
    S.selfadjointView<Eigen::Lower>().rankUpdate(Y, 1.0 / static_cast<double>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.compute(S, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw numerical_error("sample covariance eigensolve failed");
    std::vector<double> evals(solver.eigenvalues().data(),
                              solver.eigenvalues().data() + d);
    return SampleSpectrum::from_eigenvalues(evals, static_cast<std::size_t>(n));
}

Eigen::MatrixXd haar_orthogonal(std::size_t d, std::uint64_t seed) {
    if (d < 1) throw argument_error("matrix dimension must be >= 1");
    std::mt19937_64 rng(seed);
    return haar_from_rng(d, rng);
}

namespace {

McRow run_replication(const ModelSpec& base, const McTask& task,
                      std::size_t rep, std::uint64_t base_seed) {
    ModelSpec spec = base;
    spec.seed = derive_seed(base_seed, rep);
    McRow row;
    row.rep = rep;
    row.d = spec.d;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
        GeneratedData data = generate(spec);
        row.d = static_cast<std::size_t>(data.Y.rows());
        const auto t0 = std::chrono::steady_clock::now();
        SampleSpectrum sample = sample_spectrum(data.Y);
        double estimate = nan, truth = nan, error = nan;

        if (task.kind == McTaskKind::Stieltjes) {
            InversionResult inv =
                estimate_stieltjes(sample, task.stieltjes_point, task.fp);
            if (!inv.exists)
                throw estimation_error(
                    "estimator does not exist at the probe point (" +
                    to_string(inv.failure_reason) + ")");
            estimate = inv.s_hat.real();
            if (data.H_truth) {
                cpx s_pop = stieltjes(*data.H_truth, task.stieltjes_point);
                truth = s_pop.real();
                error = std::abs(inv.s_hat - s_pop);
            }
        } else {
            if (!task.g.fn)
                throw argument_error("monte carlo task requires an observable");
            PolylineCurve curve =
                rectangle_curve(task.curve_a, task.curve_b, task.curve_h);
            QuadratureRule rule = quadrature(curve, task.nodes);
            if (task.check_admissible) {
                DomainConfig dcfg =
                    sample_support_config(sample, task.tau, task.kappa);
                AdmissibilityReport rep_adm =
                    validate_admissible(curve, sample, dcfg, rule, task.fp);
                if (!rep_adm.admissible)
                    throw estimation_error(
                        "integration curve is inadmissible for this sample (" +
                        std::to_string(rep_adm.failures.size()) +
                        " failing nodes)");
            }
            if (task.kind == McTaskKind::Plss) {
                PlssEstimate est =
                    plss_estimate(sample, task.g, curve, rule, task.fp);
                estimate = est.value;
                if (data.H_truth) {
                    truth = plss_truth(*data.H_truth, task.g, curve.a, curve.b);
                    error = estimate - truth;
                }
            } else {  // CiCoverage
                if (!data.H_truth)
                    throw argument_error(
                        "coverage task requires a model with known population spectrum");
                QuadratureRule rule2 = quadrature(curve, task.nodes + 8);
                CltConfig ccfg;
                ccfg.beta = task.beta;
                ccfg.alpha = task.alpha;
                CiResult ci = confidence_interval(sample, task.g, curve, rule,
                                                  rule2, ccfg, task.fp);
                truth = plss_truth(*data.H_truth, task.g, curve.a, curve.b);
                estimate = (truth >= ci.lo && truth <= ci.hi) ? 1.0 : 0.0;
                error = ci.mu_n - truth;
            }
        }

        const auto t1 = std::chrono::steady_clock::now();
        row.runtime_s = std::chrono::duration<double>(t1 - t0).count();
        row.estimate = estimate;
        row.truth = truth;
        row.error = error;
        row.abs_error = std::abs(error);
    } catch (const error&) {
        row.failed = true;
        row.estimate = row.truth = row.error = row.abs_error = nan;
    }
    return row;
}

}  // namespace

McTable monte_carlo(const std::vector<ModelSpec>& family, const McTask& task,
                    std::size_t reps, std::uint64_t base_seed) {
    if (family.empty())
        throw argument_error("monte carlo requires a non-empty model family");
    if (reps < 1) throw argument_error("monte carlo requires reps >= 1");
    task.fp.validate();
    McTable table;
    table.rows.resize(family.size() * reps);
    parallel_for(table.rows.size(), [&](std::size_t idx) {
        const std::size_t fi = idx / reps;
        const std::size_t r = idx % reps;
        table.rows[idx] = run_replication(family[fi], task, r, base_seed);
    });
    return table;
}

}  // namespace mpinv
