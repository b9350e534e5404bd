#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <mpinv/contours.hpp>
#include <mpinv/domain.hpp>

#include "test_helpers.hpp"

using namespace mpinv;
using namespace mpinv_test;

TEST_CASE("curve construction validation") {
    CHECK_THROWS_AS(PolylineCurve::create({cpx(1.0, 0.0)}), argument_error);
    CHECK_THROWS_AS(PolylineCurve::create({cpx(1.0, 0.0), cpx(0.0, 0.0)}),
                    argument_error);  // never leaves the axis
    CHECK_THROWS_AS(
        PolylineCurve::create({cpx(1.0, 0.1), cpx(0.5, 1.0), cpx(0.0, 0.0)}),
        argument_error);  // endpoint off the axis
    CHECK_THROWS_AS(
        PolylineCurve::create({cpx(1.0, 0.0), cpx(0.5, 0.0), cpx(0.0, 0.0)}),
        argument_error);  // interior vertex on the axis
    CHECK_THROWS_AS(
        PolylineCurve::create({cpx(0.0, 0.0), cpx(0.5, 1.0), cpx(1.0, 0.0)}),
        argument_error);  // runs left to right (a >= b)
    double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(
        PolylineCurve::create({cpx(1.0, 0.0), cpx(inf, 1.0), cpx(0.0, 0.0)}),
        argument_error);

    PolylineCurve c = PolylineCurve::create(
        {cpx(2.0, 0.0), cpx(1.5, 0.7), cpx(0.5, 0.7), cpx(0.0, 0.0)});
    CHECK(c.a == 0.0);
    CHECK(c.b == 2.0);
    CHECK(c.vertices.size() == 4);

    CHECK_THROWS_AS(rectangle_curve(0.0, 1.0, 0.0), argument_error);
    PolylineCurve r = rectangle_curve(0.2, 1.4, 0.5);
    REQUIRE(r.vertices.size() == 4);
    CHECK(r.vertices[0] == cpx(1.4, 0.0));
    CHECK(r.vertices[1] == cpx(1.4, 0.5));
    CHECK(r.vertices[2] == cpx(0.2, 0.5));
    CHECK(r.vertices[3] == cpx(0.2, 0.0));
    CHECK(curve_length(r) == doctest::Approx(1.2 + 2.0 * 0.5).epsilon(1e-15));
}

TEST_CASE("unit-interval quadrature rule moments") {
    std::vector<double> x, w;
    CHECK_THROWS_AS(gauss_legendre_01(1, x, w), argument_error);
    for (std::size_t n : {2, 5, 16}) {
        gauss_legendre_01(n, x, w);
        REQUIRE(x.size() == n);
        double sw = 0.0, swx = 0.0, swx2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(x[i] > 0.0);
            CHECK(x[i] < 1.0);
            CHECK(x[i] + x[n - 1 - i] == doctest::Approx(1.0).epsilon(1e-14));
            if (i > 0) CHECK(x[i] > x[i - 1]);
            sw += w[i];
            swx += w[i] * x[i];
            swx2 += w[i] * x[i] * x[i];
        }
        CHECK(sw == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(swx == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(swx2 == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    }
    // Order n integrates monomials through degree 2n - 1 exactly.
    gauss_legendre_01(3, x, w);
    double m5 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) m5 += w[i] * std::pow(x[i], 5);
    CHECK(m5 == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("weights telescope to the endpoint difference") {
    PolylineCurve rect = rectangle_curve(0.2, 1.35, 0.5);
    PolylineCurve trap = PolylineCurve::create(
        {cpx(2.0, 0.0), cpx(1.5, 0.7), cpx(-0.5, 0.7), cpx(-1.0, 0.0)});
    for (const PolylineCurve* c : {&rect, &trap}) {
        for (double floor : {kDefaultEtaFloor, 1e-4, 0.2}) {
            QuadratureRule rule = quadrature(*c, 32, floor);
            kahan_csum acc;
            for (const cpx& wk : rule.weights) acc.add(wk);
            cpx total = acc.value();
            CHECK(total.real() == doctest::Approx(c->a - c->b).epsilon(1e-13));
            CHECK(std::abs(total.imag()) < 1e-13);
        }
    }
    CHECK_THROWS_AS(quadrature(rect, 1), argument_error);
    CHECK_THROWS_AS(quadrature(rect, 32, 0.0), argument_error);
}

TEST_CASE("nodes respect the eta floor") {
    PolylineCurve rect = rectangle_curve(0.0, 1.0, 0.5);
    QuadratureRule rule = quadrature(rect, 16, 0.2);
    for (const cpx& z : rule.nodes) CHECK(z.imag() >= 0.2 * (1.0 - 1e-12));

    // A segment living entirely below the floor cannot be represented.
    PolylineCurve low = PolylineCurve::create(
        {cpx(1.0, 0.0), cpx(1.0, 1e-12), cpx(0.0, 1e-12), cpx(0.0, 0.0)});
    CHECK_THROWS_AS(quadrature(low, 16), argument_error);
}

TEST_CASE("line integrals of entire functions are path independent") {
    PolylineCurve shallow = rectangle_curve(0.2, 1.35, 0.3);
    PolylineCurve tall = PolylineCurve::create(
        {cpx(1.35, 0.0), cpx(1.6, 0.9), cpx(0.1, 1.1), cpx(0.2, 0.0)});
    cpx want = std::exp(cpx(0.2)) - std::exp(cpx(1.35));
    for (const PolylineCurve* c : {&shallow, &tall}) {
        QuadratureRule rule = quadrature(*c);
        cpx got = integrate(rule, [](cpx z) { return std::exp(z); });
        CHECK(std::abs(got - want) < 1e-11);
        cpx lin = integrate(rule, [](cpx z) { return z; });
        cpx lin_want = 0.5 * (cpx(0.2) * cpx(0.2) - cpx(1.35) * cpx(1.35));
        CHECK(std::abs(lin - lin_want) < 1e-11);
    }
}

TEST_CASE("per-segment rule is exact through degree 2n-1") {
    PolylineCurve rect = rectangle_curve(-1.0, 2.0, 1.0);
    // The only inexactness left is the first-order fold of the 1e-8 axis
    // slivers, hence the relative 1e-6 threshold; the degree-2n term would
    // miss by about 1e-4.
    QuadratureRule r3 = quadrature(rect, 3);
    cpx got5 = integrate(r3, [](cpx z) { return std::pow(z, 5); });
    double want5 = (1.0 - 64.0) / 6.0;
    CHECK(std::abs(got5 - want5) <= 1e-6 * std::abs(want5));

    QuadratureRule r4 = quadrature(rect, 4);
    cpx got7 = integrate(r4, [](cpx z) { return std::pow(z, 7); });
    double want7 = (1.0 - 256.0) / 8.0;
    CHECK(std::abs(got7 - want7) <= 1e-6 * std::abs(want7));
}

TEST_CASE("residue of an enclosed pole via the mirrored contour") {
    // For a real pole p strictly inside (a, b), the closed contour formed by
    // the curve and its mirror image yields 2*pi*i, so the upper half alone
    // contributes imaginary part pi; the real part is the log-modulus ratio.
    PolylineCurve rect = rectangle_curve(0.2, 1.35, 0.5);
    QuadratureRule rule = quadrature(rect);
    double p = 0.7;
    cpx got = integrate(rule, [&](cpx z) { return 1.0 / (z - p); });
    CHECK(got.imag() == doctest::Approx(std::numbers::pi).epsilon(1e-9));
    CHECK(got.real() ==
          doctest::Approx(std::log(0.5 / 0.65)).epsilon(1e-9));
}

TEST_CASE("admissibility of curves against the empirical domain") {
    SampleSpectrum s = two_atom_sample(200, 1);
    DomainConfig cfg = sample_support_config(s, 0.05, 10.0);

    PolylineCurve good = rectangle_curve(0.2, 1.35, 0.5);
    QuadratureRule rule = quadrature(good);
    AdmissibilityReport rep = validate_admissible(good, s, cfg, rule);
    CHECK(rep.admissible);
    CHECK(rep.failures.empty());

    // Too low: mapped nodes over the bulk land within tau of the support.
    PolylineCurve low = rectangle_curve(0.2, 1.35, 0.05);
    QuadratureRule low_rule = quadrature(low);
    AdmissibilityReport low_rep = validate_admissible(low, s, cfg, low_rule);
    CHECK_FALSE(low_rep.admissible);
    REQUIRE_FALSE(low_rep.failures.empty());
    const NodeFailure& f = low_rep.failures.front();
    CHECK(f.node_index < low_rule.nodes.size());
    CHECK(f.z == low_rule.nodes[f.node_index]);
    CHECK(f.diag.cond_exists);
    CHECK(f.diag.dist_support <= cfg.tau);
}

TEST_CASE("replacement mode needs the curve to clear the origin interval") {
    // The replacement interval starts at zero, so a curve whose left foot
    // maps between 0 and the smallest eigenvalue is rejected there while the
    // supplied sample range accepts it; starting left of zero satisfies both.
    SampleSpectrum s = two_atom_sample(200, 1);
    DomainConfig sup = sample_support_config(s, 0.05, 10.0);
    DomainConfig rep = default_domain_config(s, 0.05, 10.0);

    PolylineCurve inside = rectangle_curve(0.2, 1.35, 0.5);
    QuadratureRule rule = quadrature(inside);
    CHECK(validate_admissible(inside, s, sup, rule).admissible);
    AdmissibilityReport bad = validate_admissible(inside, s, rep, rule);
    CHECK_FALSE(bad.admissible);
    for (const NodeFailure& nf : bad.failures)
        CHECK(nf.diag.dist_support < rep.tau);

    PolylineCurve around = rectangle_curve(-0.15, 1.35, 0.5);
    QuadratureRule around_rule = quadrature(around);
    CHECK(validate_admissible(around, s, rep, around_rule).admissible);
}

TEST_CASE("automatic height search returns the first admissible candidate") {
    SampleSpectrum s = two_atom_sample(200, 1);
    DomainConfig cfg = sample_support_config(s, 0.05, 10.0);
    auto found = auto_height(0.2, 1.35, s, cfg, {}, {0.05, 0.4});
    REQUIRE(found.has_value());
    CHECK(found->vertices[1].imag() == doctest::Approx(0.4));
    auto none = auto_height(0.2, 1.35, s, cfg, {}, {1e-3});
    CHECK_FALSE(none.has_value());
}

TEST_CASE("grid snapping rounds to k/n^K with ties toward -inf") {
    CHECK(snap_to_grid(0.123, 10, 2) == doctest::Approx(0.12).epsilon(1e-15));
    CHECK(snap_to_grid(0.125, 10, 2) == doctest::Approx(0.12).epsilon(1e-15));
    CHECK(snap_to_grid(0.1250001, 10, 2) ==
          doctest::Approx(0.13).epsilon(1e-15));
    CHECK(snap_to_grid(-0.125, 10, 2) ==
          doctest::Approx(-0.13).epsilon(1e-15));
    CHECK(snap_to_grid(0.12, 10, 2) == doctest::Approx(0.12).epsilon(1e-15));
    CHECK(snap_to_grid(3.0, 7, 3) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_THROWS_AS(snap_to_grid(0.5, 0, 2), argument_error);
    CHECK_THROWS_AS(snap_to_grid(0.5, 10, 0), argument_error);
}

TEST_CASE("two-curve pair validation") {
    SampleSpectrum s = two_atom_sample(50, 5);
    DomainConfig cfg = sample_support_config(s, 0.05, 10.0);
    PolylineCurve g = rectangle_curve(0.28, 1.6, 0.3);
    PolylineCurve f = rectangle_curve(0.2, 1.8, 0.5);

    PairReport good = validate_pair(g, f, s, cfg, 1);
    CHECK(good.ok);
    CHECK(good.curve_g_admissible);
    CHECK(good.endpoints_on_grid);
    CHECK(good.f_node_failures.empty());
    CHECK(good.separation_ok);
    CHECK(good.min_separation > cfg.tau);
    CHECK(good.min_separation < 0.1);

    // Endpoint off the snap grid (n = 1000, K = 1).
    PairReport offgrid =
        validate_pair(rectangle_curve(0.2805, 1.6, 0.3), f, s, cfg, 1);
    CHECK_FALSE(offgrid.ok);
    CHECK_FALSE(offgrid.endpoints_on_grid);
    CHECK(offgrid.curve_g_admissible);

    // Sample-side curve grazing the smallest eigenvalue.
    PairReport graze =
        validate_pair(g, rectangle_curve(0.33, 1.8, 0.5), s, cfg, 1);
    CHECK_FALSE(graze.ok);
    CHECK_FALSE(graze.f_node_failures.empty());

    // Population-side curve too close to the mapped sample-side curve.
    PairReport close =
        validate_pair(rectangle_curve(0.24, 1.6, 0.3), f, s, cfg, 1);
    CHECK_FALSE(close.ok);
    CHECK_FALSE(close.separation_ok);
    CHECK(close.min_separation < cfg.tau);
    CHECK(close.min_separation > 0.01);
    CHECK(close.curve_g_admissible);
    CHECK(close.f_node_failures.empty());
}
