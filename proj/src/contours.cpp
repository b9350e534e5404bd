#include "mpinv/contours.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "mpinv/mp_forward.hpp"
#include "mpinv/parallel.hpp"

namespace mpinv {

PolylineCurve PolylineCurve::create(std::vector<cpx> vertices) {
    if (vertices.size() < 2)
        throw argument_error("curve needs at least two vertices");
    for (const cpx& v : vertices)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw argument_error("curve vertices must be finite");
    if (vertices.front().imag() != 0.0 || vertices.back().imag() != 0.0)
        throw argument_error("curve endpoints must lie on the real axis");
    for (std::size_t k = 1; k + 1 < vertices.size(); ++k)
        if (!(vertices[k].imag() > 0.0))
            throw argument_error("interior vertex " + std::to_string(k) +
                                 " must lie strictly above the real axis");
    PolylineCurve c;
    c.b = vertices.front().real();
    c.a = vertices.back().real();
    if (!(c.a < c.b))
        throw argument_error("curve must run from b down to a with a < b");
    if (vertices.size() == 2)
        throw argument_error("curve must leave the real axis");
    c.vertices = std::move(vertices);
    return c;
}

PolylineCurve rectangle_curve(double a, double b, double h) {
    if (!(h > 0.0)) throw argument_error("rectangle height must be positive");
    return PolylineCurve::create({cpx(b, 0.0), cpx(b, h), cpx(a, h), cpx(a, 0.0)});
}

double curve_length(const PolylineCurve& curve) {
    double len = 0.0;
    for (std::size_t k = 1; k < curve.vertices.size(); ++k)
        len += std::abs(curve.vertices[k] - curve.vertices[k - 1]);
    return len;
}

void gauss_legendre_01(std::size_t n, std::vector<double>& x,
                       std::vector<double>& w) {
    if (n < 2) throw argument_error("quadrature order must be at least 2");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    // Roots of the Legendre polynomial on [-1, 1] by Newton iteration,
    // then mapped to [0, 1].
    std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                double jd = static_cast<double>(j);
                p1 = ((2.0 * jd + 1.0) * z * p2 - jd * p3) / (jd + 1.0);
            }
            pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        double p1 = 1.0, p2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double p3 = p2;
            p2 = p1;
            double jd = static_cast<double>(j);
            p1 = ((2.0 * jd + 1.0) * z * p2 - jd * p3) / (jd + 1.0);
        }
        pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        double weight = 1.0 / ((1.0 - z * z) * pp * pp);
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
}

namespace {

const std::pair<std::vector<double>, std::vector<double>>& cached_gl(std::size_t n) {
    static std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        std::pair<std::vector<double>, std::vector<double>> entry;
        gauss_legendre_01(n, entry.first, entry.second);
        it = cache.emplace(n, std::move(entry)).first;
    }
    return it->second;
}

}  // namespace

QuadratureRule quadrature(const PolylineCurve& curve,
                          std::size_t nodes_per_segment, double eta_floor) {
    if (nodes_per_segment < 2)
        throw argument_error("nodes_per_segment must be at least 2");
    if (!(eta_floor > 0.0))
        throw argument_error("eta_floor must be positive");

    const auto& [gx, gw] = cached_gl(nodes_per_segment);

    QuadratureRule rule;
    rule.nodes_per_segment = nodes_per_segment;
    rule.eta_floor = eta_floor;
    rule.nodes.reserve((curve.vertices.size() - 1) * nodes_per_segment);
    rule.weights.reserve(rule.nodes.capacity());

    for (std::size_t seg = 1; seg < curve.vertices.size(); ++seg) {
        cpx p = curve.vertices[seg - 1];
        cpx q = curve.vertices[seg];
        if (p.imag() < eta_floor && q.imag() < eta_floor)
            throw argument_error("curve segment " + std::to_string(seg - 1) +
                                 " lies entirely below the eta floor");
        cpx p_eff = p, q_eff = q;
        if (p.imag() < eta_floor)
            p_eff = p + (eta_floor - p.imag()) / (q.imag() - p.imag()) * (q - p);
        if (q.imag() < eta_floor)
            q_eff = p + (eta_floor - p.imag()) / (q.imag() - p.imag()) * (q - p);

        cpx span = q_eff - p_eff;
        std::size_t base = rule.nodes.size();
        for (std::size_t k = 0; k < nodes_per_segment; ++k) {
            rule.nodes.push_back(p_eff + gx[k] * span);
            rule.weights.push_back(gw[k] * span);
        }
        // Fold truncated slivers into the adjacent node so the weight sum
        // still telescopes to the full segment difference q - p.
        rule.weights[base] += p_eff - p;
        rule.weights[base + nodes_per_segment - 1] += q - q_eff;
    }
    return rule;
}

AdmissibilityReport validate_admissible(const PolylineCurve& curve,
                                        const SampleSpectrum& spec,
                                        const DomainConfig& cfg,
                                        const QuadratureRule& rule,
                                        const FixedPointConfig& fp) {
    (void)curve;  // geometry is already embedded in the rule's nodes
    AdmissibilityReport report;
    std::vector<MembershipResult> results(rule.nodes.size());
    parallel_for(rule.nodes.size(), [&](std::size_t k) {
        results[k] = membership(spec, cfg, rule.nodes[k], fp);
    });
    for (std::size_t k = 0; k < results.size(); ++k)
        if (!results[k].member)
            report.failures.push_back({k, rule.nodes[k], results[k].diag});
    report.admissible = report.failures.empty();
    return report;
}

std::optional<PolylineCurve> auto_height(double a, double b,
                                         const SampleSpectrum& spec,
                                         const DomainConfig& cfg,
                                         const FixedPointConfig& fp,
                                         const std::vector<double>& h_grid) {
    for (double h : h_grid) {
        PolylineCurve candidate = rectangle_curve(a, b, h);
        QuadratureRule rule = quadrature(candidate);
        if (validate_admissible(candidate, spec, cfg, rule, fp).admissible)
            return candidate;
    }
    return std::nullopt;
}

double snap_to_grid(double x, std::size_t n, std::size_t K) {
    if (n < 1 || K < 1) throw argument_error("grid parameters must be positive");
    double g = std::pow(static_cast<double>(n), static_cast<double>(K));
    // Nearest k/g with half-integer ties resolved toward -inf.
    double k = std::ceil(x * g - 0.5);
    return k / g;
}

PairReport validate_pair(const PolylineCurve& curve_g,
                         const PolylineCurve& curve_f,
                         const SampleSpectrum& spec, const DomainConfig& cfg,
                         std::size_t K, const FixedPointConfig& fp) {
    PairReport report;

    QuadratureRule rule_g = quadrature(curve_g, 64);
    QuadratureRule rule_f = quadrature(curve_f, 72);

    AdmissibilityReport adm = validate_admissible(curve_g, spec, cfg, rule_g, fp);
    report.curve_g_admissible = adm.admissible;
    report.g_failures = std::move(adm.failures);

    auto on_grid = [&](double x) {
        double s = snap_to_grid(x, spec.n, K);
        return std::abs(x - s) <= 1e-12 * std::max(1.0, std::abs(x));
    };
    report.endpoints_on_grid = on_grid(curve_g.a) && on_grid(curve_g.b);

    std::vector<cpx> mapped(rule_f.nodes.size());
    for (std::size_t k = 0; k < rule_f.nodes.size(); ++k) {
        cpx zt = rule_f.nodes[k];
        bool ok = std::abs(zt) < cfg.kappa;
        double dist = std::min(support_distance(spec.nu_hat, zt), std::abs(zt));
        ok = ok && dist >= cfg.tau;
        cpx phi(std::numeric_limits<double>::quiet_NaN(), 0.0);
        try {
            phi = varphi_map([&](cpx w) { return stieltjes(spec.nu_hat, w); },
                             spec.c_n, zt);
            double m = std::abs(phi);
            ok = ok && cfg.tau <= m && m <= cfg.kappa;
        } catch (const error&) {
            ok = false;
        }
        mapped[k] = phi;
        if (!ok) report.f_node_failures.push_back(k);
    }

    double min_sep = std::numeric_limits<double>::infinity();
    for (const cpx& zg : rule_g.nodes)
        for (const cpx& ph : mapped)
            if (std::isfinite(ph.real()))
                min_sep = std::min(min_sep, std::abs(zg - ph));
    report.min_separation = min_sep;
    report.separation_ok = min_sep >= cfg.tau;

    report.ok = report.curve_g_admissible && report.endpoints_on_grid &&
                report.f_node_failures.empty() && report.separation_ok;
    return report;
}

}  // namespace mpinv
