#include <doctest.h>

#include <cmath>
#include <complex>

#include <Eigen/Dense>
#include <mpinv/estimators.hpp>
#include <mpinv/simgen.hpp>

#include "test_helpers.hpp"

using namespace mpinv;
using namespace mpinv_test;

namespace {

struct TwoAtomCase {
    GeneratedData data;
    SampleSpectrum spec;
};

TwoAtomCase two_atom_case(std::size_t d, std::uint64_t seed) {
    ModelSpec ms;
    ms.kind = ModelKind::TwoAtomGaussian;
    ms.d = d;
    ms.seed = seed;
    TwoAtomCase tc;
    tc.data = generate(ms);
    tc.spec = sample_spectrum(tc.data.Y);
    return tc;
}

}  // namespace

TEST_CASE("builtin observables evaluate and validate") {
    cpx z(1.5, 0.0);
    CHECK(builtin_holo("identity")(z) == z);
    CHECK(builtin_holo("square")(z).real() == doctest::Approx(2.25));
    CHECK(builtin_holo("cube")(z).real() == doctest::Approx(3.375));
    CHECK(builtin_holo("exp")(z).real() == doctest::Approx(std::exp(1.5)));
    CHECK(builtin_holo("log")(z).real() == doctest::Approx(std::log(1.5)));
    CHECK(builtin_holo("const:1")(cpx(9.0, 9.0)) == cpx(1.0, 0.0));
    CHECK(builtin_holo("pow:0")(z) == cpx(1.0, 0.0));
    CHECK(builtin_holo("pow:4")(z).real() == doctest::Approx(5.0625));

    CHECK_THROWS_AS(builtin_holo("pow:-1"), argument_error);
    CHECK_THROWS_AS(builtin_holo("pow:65"), argument_error);
    CHECK_THROWS_AS(builtin_holo("pow:abc"), argument_error);
    CHECK_THROWS_AS(builtin_holo("pow:3x"), argument_error);
    CHECK_THROWS_AS(builtin_holo("sinh"), argument_error);
}

TEST_CASE("observable wrapper enforces conjugate symmetry") {
    HoloFunction poly = make_holo(
        "poly", [](cpx z) { return z * z + 3.0 * z - 1.0; });
    CHECK(poly(cpx(2.0, 0.0)).real() == doctest::Approx(9.0));
    CHECK_THROWS_AS(make_holo("shift", [](cpx z) { return z + cpx(0.0, 1.0); }),
                    argument_error);
    CHECK_THROWS_AS(
        make_holo("rot", [](cpx z) { return cpx(0.0, 1.0) * z; }),
        argument_error);
}

TEST_CASE("population statistic truth sums atoms strictly inside") {
    DiscreteMeasure H = two_atom_model().H;
    HoloFunction id = builtin_holo("identity");
    CHECK(plss_truth(H, id, 0.4, 1.1) == doctest::Approx(0.75));
    CHECK(plss_truth(H, id, 0.4, 0.9) == doctest::Approx(0.25));
    CHECK(plss_truth(H, id, 0.5, 1.1) == doctest::Approx(0.5));  // 0.5 excluded
    CHECK(plss_truth(H, id, 1.5, 2.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(plss_truth(H, id, 1.0, 1.0), argument_error);
}

TEST_CASE("plug-in baseline shows the finite-ratio bias") {
    TwoAtomCase tc = two_atom_case(200, 1);
    HoloFunction id = builtin_holo("identity");
    HoloFunction cube = builtin_holo("cube");
    // The mean eigenvalue is asymptotically unbiased ...
    CHECK(plss_plugin_baseline(tc.spec, id) == doctest::Approx(0.75).epsilon(0.03));
    // ... but the third moment of the sample spectrum overshoots the
    // population value 0.5625 by roughly 3*c*m1*m2 ~ 0.07.
    double plug = plss_plugin_baseline(tc.spec, cube);
    CHECK(plug > 0.59);
    CHECK(plug < 0.67);
}

TEST_CASE("contour estimates recover population statistics") {
    TwoAtomCase tc = two_atom_case(200, 1);
    PolylineCurve curve = rectangle_curve(0.2, 1.35, 0.5);
    QuadratureRule rule = quadrature(curve);

    struct Row {
        const char* name;
        double tol;
    };
    for (const Row& row : {Row{"identity", 5e-3}, Row{"cube", 1.2e-2},
                           Row{"exp", 1e-2}}) {
        HoloFunction g = builtin_holo(row.name);
        PlssEstimate est = plss_estimate(tc.spec, g, curve, rule);
        double truth = plss_truth(*tc.data.H_truth, g, curve.a, curve.b);
        CHECK(std::abs(est.value - truth) <= row.tol);
        // The mirrored-contour combination is real by construction.
        CHECK(est.raw.imag() == 0.0);
        CHECK(est.nodes == rule.nodes.size());
        CHECK(est.curve.a == curve.a);
    }

    // Against the exact third moment the contour estimate beats the naive
    // plug-in by a wide margin.
    HoloFunction cube = builtin_holo("cube");
    double truth = plss_truth(*tc.data.H_truth, cube, 0.2, 1.35);
    double est = plss_estimate(tc.spec, cube, curve, rule).value;
    double plug = plss_plugin_baseline(tc.spec, cube);
    CHECK(std::abs(est - truth) < std::abs(plug - truth) / 5.0);
}

TEST_CASE("estimate is linear in the observable") {
    TwoAtomCase tc = two_atom_case(100, 3);
    PolylineCurve curve = rectangle_curve(0.2, 1.35, 0.5);
    QuadratureRule rule = quadrature(curve, 32);
    double v_id =
        plss_estimate(tc.spec, builtin_holo("identity"), curve, rule).value;
    double v_sq =
        plss_estimate(tc.spec, builtin_holo("square"), curve, rule).value;
    HoloFunction combo =
        make_holo("combo", [](cpx z) { return 2.0 * z - 3.0 * z * z; });
    double v_combo = plss_estimate(tc.spec, combo, curve, rule).value;
    CHECK(v_combo ==
          doctest::Approx(2.0 * v_id - 3.0 * v_sq).epsilon(1e-12));
}

TEST_CASE("estimation fails loudly when nodes leave the domain") {
    TwoAtomCase tc = two_atom_case(200, 1);
    PolylineCurve low = rectangle_curve(0.2, 1.35, 0.01);
    QuadratureRule rule = quadrature(low);
    CHECK_THROWS_AS(
        plss_estimate(tc.spec, builtin_holo("identity"), low, rule),
        estimation_error);
}

TEST_CASE("two-plane kernel maps conjugates to conjugates") {
    TwoAtomCase tc = two_atom_case(200, 1);
    cpx z1(-0.7, 0.4), zt2(1.9, 0.25);
    cpx k1 = glss_kernel(tc.spec, z1, zt2);
    cpx k2 = glss_kernel(tc.spec, std::conj(z1), std::conj(zt2));
    CHECK(std::abs(k1 - std::conj(k2)) <= 1e-13 * (1.0 + std::abs(k1)));
    CHECK(std::isfinite(k1.real()));
    CHECK(std::isfinite(k1.imag()));
}

namespace {

struct GlssFixture {
    TwoAtomCase tc;
    PolylineCurve cg, cf;
    QuadratureRule rg, rf;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    Eigen::VectorXd pop_eigs;
    Eigen::MatrixXd pop_vecs;

    GlssFixture()
        : tc(two_atom_case(50, 5)),
          cg(rectangle_curve(0.28, 1.6, 0.3)),
          cf(rectangle_curve(0.2, 1.8, 0.5)),
          rg(quadrature(cg, 64)),
          rf(quadrature(cf, 72)) {
        const Eigen::Index d = 50;
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
        S.selfadjointView<Eigen::Lower>().rankUpdate(
            tc.data.Y, 1.0 / static_cast<double>(tc.spec.n));
        es.compute(S);
        // The synthetic covariance is diagonal: unit block first, then 1/2.
        pop_eigs.resize(d);
        std::size_t ones = (50 + 1) / 2;
        for (Eigen::Index i = 0; i < d; ++i)
            pop_eigs[i] = (static_cast<std::size_t>(i) < ones) ? 1.0 : 0.5;
        pop_vecs = Eigen::MatrixXd::Identity(d, d);
    }
};

}  // namespace

TEST_CASE("generalized estimator tracks the finite-dimensional truth") {
    GlssFixture fx;
    HoloFunction id = builtin_holo("identity");
    GlssEstimate est = glss_estimate(fx.tc.spec, id, id, fx.cf, fx.cg, fx.rg,
                                     fx.rf);
    double truth = glss_truth(fx.es.eigenvalues(), fx.es.eigenvectors(),
                              fx.pop_eigs, fx.pop_vecs, id, id,
                              Interval{0.2, 1.8}, Interval{0.28, 1.6});
    CHECK(std::abs(est.value - truth) <= 2e-2);
    CHECK(est.imag_residue <= 1e-12);
}

TEST_CASE("generalized estimator degenerates correctly") {
    GlssFixture fx;
    HoloFunction one = builtin_holo("const:1");
    HoloFunction cube = builtin_holo("cube");

    // Both observables constant and both curves fully enclosing: the double
    // integral resolves to the normalized total overlap, exactly one.
    GlssEstimate full =
        glss_estimate(fx.tc.spec, one, one, fx.cf, fx.cg, fx.rg, fx.rf);
    CHECK(full.value == doctest::Approx(1.0).epsilon(1e-6));

    // Constant sample-side observable: the sample-plane integral collapses
    // and the generalized estimate reduces to the plain one.
    GlssEstimate red =
        glss_estimate(fx.tc.spec, one, cube, fx.cf, fx.cg, fx.rg, fx.rf);
    PlssEstimate plain = plss_estimate(fx.tc.spec, cube, fx.cg, fx.rg);
    CHECK(red.value == doctest::Approx(plain.value).epsilon(1e-12));
}

TEST_CASE("finite-dimensional reference statistic") {
    HoloFunction id = builtin_holo("identity");
    HoloFunction sq = builtin_holo("square");

    Eigen::VectorXd l(2), m(2);
    l << 1.0, 2.0;
    m << 3.0, 4.0;
    Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);

    CHECK(glss_truth(l, I2, m, I2, id, sq, Interval{0.0, 5.0},
                     Interval{0.0, 5.0}) ==
          doctest::Approx(0.5 * (1.0 * 9.0 + 2.0 * 16.0)));
    // Interval masks select contributing pairs.
    CHECK(glss_truth(l, I2, m, I2, id, sq, Interval{0.0, 1.5},
                     Interval{0.0, 5.0}) == doctest::Approx(0.5 * 9.0));
    CHECK(glss_truth(l, I2, m, I2, id, sq, Interval{0.0, 5.0},
                     Interval{3.5, 5.0}) == doctest::Approx(0.5 * 2.0 * 16.0));

    // A rotation between the bases mixes contributions by squared overlaps.
    double th = 0.3, c2 = std::cos(th) * std::cos(th),
           s2 = std::sin(th) * std::sin(th);
    Eigen::MatrixXd R(2, 2);
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    double want = 0.5 * (1.0 * (c2 * 9.0 + s2 * 16.0) +
                         2.0 * (s2 * 9.0 + c2 * 16.0));
    CHECK(glss_truth(l, R, m, I2, id, sq, Interval{0.0, 5.0},
                     Interval{0.0, 5.0}) == doctest::Approx(want));

    Eigen::VectorXd bad(3);
    bad << 1.0, 2.0, 3.0;
    CHECK_THROWS_AS(glss_truth(l, I2, bad, I2, id, sq, Interval{0.0, 5.0},
                               Interval{0.0, 5.0}),
                    argument_error);
}
