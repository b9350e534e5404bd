#include "mpinv/domain.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mpinv/parallel.hpp"

namespace mpinv {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void DomainConfig::validate() const {
    if (!(tau > 0.0) || !(kappa > tau) || !std::isfinite(kappa))
        throw argument_error("domain requires 0 < tau < kappa < inf");
    if (mode == DomainMode::ReplacementSafe) {
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
            throw argument_error("ReplacementSafe mode requires sigma2 > 0");
    } else {
        if (nu_support.empty())
            throw argument_error("SupportSupplied mode requires at least one interval");
        for (const auto& iv : nu_support)
            if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
                throw argument_error("support interval bounds must be finite with lo <= hi");
    }
}

DomainConfig default_domain_config(const SampleSpectrum& spec, double tau,
                                   double kappa) {
    DomainConfig cfg;
    cfg.tau = tau;
    cfg.kappa = kappa;
    cfg.mode = DomainMode::ReplacementSafe;
    double lmax = spec.nu_hat.atoms().back();
    double r = 1.0 + std::sqrt(spec.c_n);
    cfg.sigma2 = lmax / (r * r);
    cfg.sigma2_defaulted = true;
    cfg.validate();
    return cfg;
}

DomainConfig sample_support_config(const SampleSpectrum& spec, double tau,
                                   double kappa) {
    DomainConfig cfg;
    cfg.tau = tau;
    cfg.kappa = kappa;
    cfg.mode = DomainMode::SupportSupplied;
    cfg.nu_support = {{spec.nu_hat.atoms().front(), spec.nu_hat.atoms().back()}};
    cfg.validate();
    return cfg;
}

MembershipResult membership(const SampleSpectrum& spec, const DomainConfig& cfg,
                            cpx z, const FixedPointConfig& fp) {
    cfg.validate();
    MembershipResult out;
    MembershipDiagnostics& dg = out.diag;
    dg.sigma2_used = cfg.mode == DomainMode::ReplacementSafe ? cfg.sigma2 : kNaN;
    dg.sigma2_defaulted = cfg.sigma2_defaulted;
    dg.abs_phi = dg.dist_eigs = dg.dist_support = dg.ratio = kNaN;
    dg.phi_hat = cpx(kNaN, kNaN);

    dg.in_upper = z.imag() > 0.0;
    dg.abs_z = std::abs(z);
    dg.cond_modulus = cfg.tau < dg.abs_z && dg.abs_z < cfg.kappa;
    if (!dg.in_upper || !dg.cond_modulus) return out;

    InversionResult inv = estimate_stieltjes(spec, z, fp);
    dg.cond_exists = inv.exists;
    dg.failure_reason = inv.failure_reason;
    dg.iterations = inv.iterations;
    dg.ratio = inv.ratio;
    if (!inv.exists) return out;

    dg.phi_hat = inv.phi_hat;
    dg.abs_phi = std::abs(inv.phi_hat);
    dg.cond_phi_modulus = cfg.tau < dg.abs_phi && dg.abs_phi < cfg.kappa;

    dg.dist_eigs = support_distance(spec.nu_hat, inv.phi_hat);
    dg.cond_dist_eigs = dg.dist_eigs > cfg.tau;

    if (cfg.mode == DomainMode::ReplacementSafe) {
        double hi = support_upper_bound(cfg.sigma2, spec.c_n);
        dg.dist_support = interval_distance(inv.phi_hat, 0.0, hi);
        dg.cond_dist_support = dg.dist_support >= cfg.tau;
    } else {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& iv : cfg.nu_support)
            best = std::min(best, interval_distance(inv.phi_hat, iv.lo, iv.hi));
        dg.dist_support = best;
        dg.cond_dist_support = dg.dist_support > cfg.tau;
    }

    out.member = dg.cond_modulus && dg.cond_exists && dg.cond_phi_modulus &&
                 dg.cond_dist_eigs && dg.cond_dist_support;
    return out;
}

RasterGrid rasterize(const SampleSpectrum& spec, const DomainConfig& cfg,
                     const BoundingBox& bbox, std::size_t nx, std::size_t ny,
                     const FixedPointConfig& fp) {
    cfg.validate();
    if (nx == 0 || ny == 0)
        throw argument_error("raster resolution must be positive");
    if (!(bbox.re_min < bbox.re_max) || !(bbox.im_min < bbox.im_max))
        throw argument_error("bounding box must have positive extent");

    RasterGrid grid;
    grid.nx = nx;
    grid.ny = ny;
    grid.cells.resize(nx * ny);
    double dx = (bbox.re_max - bbox.re_min) / static_cast<double>(nx);
    double dy = (bbox.im_max - bbox.im_min) / static_cast<double>(ny);

    parallel_for(nx * ny, [&](std::size_t idx) {
        std::size_t i = idx / nx;  // row (imaginary direction)
        std::size_t j = idx % nx;  // column (real direction)
        double re = bbox.re_min + (static_cast<double>(j) + 0.5) * dx;
        double im = bbox.im_min + (static_cast<double>(i) + 0.5) * dy;
        MembershipResult r = membership(spec, cfg, cpx(re, im), fp);
        RasterCell& cell = grid.cells[idx];
        cell.re = re;
        cell.im = im;
        cell.member = r.member;
        cell.abs_phi = r.diag.abs_phi;
        cell.dist_eigs = r.diag.dist_eigs;
        cell.dist_interval = r.diag.dist_support;
        cell.ratio = r.diag.ratio;
    });
    return grid;
}

}  // namespace mpinv
