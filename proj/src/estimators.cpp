#include "mpinv/estimators.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mpinv/parallel.hpp"

namespace mpinv {

namespace {

constexpr cpx kProbes[8] = {
    {0.7, 0.9},  {-1.3, 0.6}, {2.1, 1.7}, {0.4, 0.1},
    {-0.8, 2.2}, {1.6, 0.3},  {3.2, 1.1}, {0.05, 0.5},
};

}  // namespace

HoloFunction make_holo(std::string label, std::function<cpx(cpx)> fn) {
    for (const cpx& p : kProbes) {
        cpx up = fn(p);
        cpx dn = fn(std::conj(p));
        if (!(std::abs(std::conj(up) - dn) <= 1e-10 * (1.0 + std::abs(up))))
            throw argument_error("observable '" + label +
                                 "' does not map conjugates to conjugates");
    }
    return HoloFunction{std::move(label), std::move(fn)};
}

HoloFunction builtin_holo(const std::string& name) {
    if (name == "identity")
        return make_holo(name, [](cpx z) { return z; });
    if (name == "square")
        return make_holo(name, [](cpx z) { return z * z; });
    if (name == "cube")
        return make_holo(name, [](cpx z) { return z * z * z; });
    if (name == "exp")
        return make_holo(name, [](cpx z) { return std::exp(z); });
    if (name == "log")
        return make_holo(name, [](cpx z) { return std::log(z); });
    if (name == "const:1")
        return make_holo(name, [](cpx) { return cpx(1.0, 0.0); });
    if (name.rfind("pow:", 0) == 0) {
        std::size_t pos = 0;
        int k = 0;
        try {
            k = std::stoi(name.substr(4), &pos);
        } catch (const std::exception&) {
            throw argument_error("bad exponent in observable '" + name + "'");
        }
        if (pos != name.size() - 4 || k < 0 || k > 64)
            throw argument_error("bad exponent in observable '" + name + "'");
        return make_holo(name, [k](cpx z) {
            cpx acc(1.0, 0.0);
            for (int i = 0; i < k; ++i) acc *= z;
            return acc;
        });
    }
    throw argument_error("unknown observable '" + name + "'");
}

PlssEstimate plss_estimate(const SampleSpectrum& spec, const HoloFunction& g,
                           const PolylineCurve& curve, const QuadratureRule& rule,
                           const FixedPointConfig& fp) {
    std::vector<InversionResult> inv(rule.nodes.size());
    parallel_for(rule.nodes.size(), [&](std::size_t k) {
        inv[k] = estimate_stieltjes(spec, rule.nodes[k], fp);
    });
    std::string bad;
    for (std::size_t k = 0; k < inv.size(); ++k)
        if (!inv[k].exists) bad += (bad.empty() ? "" : ", ") + std::to_string(k);
    if (!bad.empty())
        throw estimation_error("population transform estimate missing at nodes: " + bad);

    kahan_csum acc;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        acc.add(rule.weights[k] * g(rule.nodes[k]) * inv[k].s_hat);
    cpx S = acc.value();

    PlssEstimate out;
    // Closed-contour value over the curve and its mirror image: conjugated
    // arguments carry conjugated differentials.
    out.raw = (S - std::conj(S)) / (-2.0 * std::numbers::pi * cpx(0.0, 1.0));
    out.value = out.raw.real();
    out.nodes = rule.nodes.size();
    out.curve = curve;
    return out;
}

double plss_truth(const DiscreteMeasure& H, const HoloFunction& g, double a,
                  double b) {
    if (!(a < b)) throw argument_error("interval requires a < b");
    kahan_sum acc;
    const auto& atoms = H.atoms();
    const auto& weights = H.weights();
    for (std::size_t j = 0; j < atoms.size(); ++j)
        if (a < atoms[j] && atoms[j] < b)
            acc.add(weights[j] * g(cpx(atoms[j], 0.0)).real());
    return acc.value();
}

double plss_plugin_baseline(const SampleSpectrum& spec, const HoloFunction& g) {
    kahan_sum acc;
    const auto& atoms = spec.nu_hat.atoms();
    const auto& weights = spec.nu_hat.weights();
    for (std::size_t j = 0; j < atoms.size(); ++j)
        acc.add(weights[j] * g(cpx(atoms[j], 0.0)).real());
    return acc.value();
}

namespace {

// Kernel from precomputed transforms: s1 is the population-transform
// estimate at z1, su2 the companion sample transform at zt2.
cpx kernel_value(double c_n, cpx z1, cpx s1, cpx zt2, cpx su2) {
    cpx num = zt2 * su2 * su2 + (1.0 - c_n) * su2 + c_n * s1;
    cpx den = c_n * (z1 * su2 + 1.0) * zt2;
    if (std::abs(den) < 1e-12 * (1.0 + std::abs(num)))
        throw singularity_error("two-plane kernel denominator vanished");
    return num / den;
}

}  // namespace

cpx glss_kernel(const SampleSpectrum& spec, cpx z1, cpx zt2,
                const FixedPointConfig& fp) {
    InversionResult inv = estimate_stieltjes_ext(spec, z1, fp);
    if (!inv.exists)
        throw estimation_error("population transform estimate does not exist at z1 (" +
                               to_string(inv.failure_reason) + ")");
    cpx su2 = underline_stieltjes(spec.nu_hat, spec.c_n, zt2);
    return kernel_value(spec.c_n, z1, inv.s_hat, zt2, su2);
}

GlssEstimate glss_estimate(const SampleSpectrum& spec, const HoloFunction& f,
                           const HoloFunction& g, const PolylineCurve& curve_f,
                           const PolylineCurve& curve_g,
                           const QuadratureRule& rule_g,
                           const QuadratureRule& rule_f,
                           const FixedPointConfig& fp) {
    (void)curve_f;
    (void)curve_g;
    const std::size_t ng = rule_g.nodes.size();
    const std::size_t nf = rule_f.nodes.size();

    std::vector<InversionResult> inv(ng);
    parallel_for(ng, [&](std::size_t j) {
        inv[j] = estimate_stieltjes(spec, rule_g.nodes[j], fp);
    });
    std::string bad;
    for (std::size_t j = 0; j < ng; ++j)
        if (!inv[j].exists) bad += (bad.empty() ? "" : ", ") + std::to_string(j);
    if (!bad.empty())
        throw estimation_error(
            "population transform estimate missing at population-curve nodes: " + bad);

    std::vector<cpx> su(nf), gf(nf);
    for (std::size_t k = 0; k < nf; ++k) {
        su[k] = underline_stieltjes(spec.nu_hat, spec.c_n, rule_f.nodes[k]);
        gf[k] = f(rule_f.nodes[k]);
    }
    std::vector<cpx> gg(ng);
    for (std::size_t j = 0; j < ng; ++j) gg[j] = g(rule_g.nodes[j]);

    // Four closed-contour terms; conjugate symmetry of all inputs makes the
    // mixed terms exact conjugates, so two double sums suffice:
    //   term_pp: both curves as-is;  term_mp: population curve mirrored.
    kahan_csum acc_pp, acc_mp;
    for (std::size_t k = 0; k < nf; ++k) {
        cpx zt2 = rule_f.nodes[k];
        cpx w2 = rule_f.weights[k];
        for (std::size_t j = 0; j < ng; ++j) {
            cpx z1 = rule_g.nodes[j];
            cpx kv = kernel_value(spec.c_n, z1, inv[j].s_hat, zt2, su[k]);
            acc_pp.add(rule_g.weights[j] * w2 * gg[j] * gf[k] * kv);
            cpx kv_m = kernel_value(spec.c_n, std::conj(z1),
                                    std::conj(inv[j].s_hat), zt2, su[k]);
            acc_mp.add(std::conj(rule_g.weights[j]) * w2 * std::conj(gg[j]) *
                       gf[k] * kv_m);
        }
    }

    cpx t_pp = acc_pp.value();
    cpx t_mp = acc_mp.value();
    cpx raw = (t_pp - t_mp - std::conj(t_mp) + std::conj(t_pp)) /
              (4.0 * std::numbers::pi * std::numbers::pi);

    GlssEstimate out;
    out.raw = raw;
    out.value = raw.real();
    out.imag_residue =
        std::abs(raw.imag()) / std::max(1.0, std::abs(raw.real()));
    return out;
}

double glss_truth(const Eigen::VectorXd& sample_eigs,
                  const Eigen::MatrixXd& sample_vecs,
                  const Eigen::VectorXd& pop_eigs,
                  const Eigen::MatrixXd& pop_vecs, const HoloFunction& f,
                  const HoloFunction& g, const Interval& int_f,
                  const Interval& int_g) {
    const Eigen::Index d = sample_eigs.size();
    if (sample_vecs.rows() != d || sample_vecs.cols() != d ||
        pop_eigs.size() != d || pop_vecs.rows() != d || pop_vecs.cols() != d)
        throw argument_error("eigendecomposition dimensions do not match");

    Eigen::VectorXd fv(d), gv(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double l = sample_eigs[j];
        fv[j] = (int_f.lo <= l && l <= int_f.hi) ? f(cpx(l, 0.0)).real() : 0.0;
        double m = pop_eigs[j];
        gv[j] = (int_g.lo <= m && m <= int_g.hi) ? g(cpx(m, 0.0)).real() : 0.0;
    }
    Eigen::MatrixXd overlap = (sample_vecs.transpose() * pop_vecs).array().square();
    return fv.dot(overlap * gv) / static_cast<double>(d);
}

}  // namespace mpinv
