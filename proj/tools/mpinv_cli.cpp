// Command-line interface: estimation of population spectral quantities from
// sample covariance eigenvalues, domain rasters, Monte Carlo experiments and
// confidence-interval reports.  Exit codes: 0 success, 2 input error,
// 3 numerical error, 4 inadmissible curve / nonexistent estimate,
// 5 fixed-point non-convergence.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpinv/contours.hpp"
#include "mpinv/domain.hpp"
#include "mpinv/errors.hpp"
#include "mpinv/estimators.hpp"
#include "mpinv/inference.hpp"
#include "mpinv/io.hpp"
#include "mpinv/mp_forward.hpp"
#include "mpinv/mp_inverse.hpp"
#include "mpinv/parallel.hpp"
#include "mpinv/simgen.hpp"

namespace {

using mpinv::cpx;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// small helpers

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    mpinv::write_text_atomic(out_path, content);
}

ordered_json cpx_json(cpx z) { return ordered_json::array({z.real(), z.imag()}); }

ordered_json curve_json(const mpinv::PolylineCurve& curve) {
    ordered_json j;
    j["vertices"] = ordered_json::array();
    for (cpx v : curve.vertices) j["vertices"].push_back(cpx_json(v));
    j["a"] = curve.a;
    j["b"] = curve.b;
    return j;
}

std::size_t resolve_n(std::size_t d, double c_opt, std::size_t n_opt) {
    if (n_opt > 0) return n_opt;
    if (c_opt > 0.0) {
        long long n = std::llround(static_cast<double>(d) / c_opt);
        if (n < 1) throw mpinv::argument_error("aspect ratio c implies an empty sample");
        return static_cast<std::size_t>(n);
    }
    throw mpinv::argument_error("provide --n or --c to fix the sample count");
}

mpinv::SampleSpectrum load_spectrum(const std::string& eigs_path, double c_opt,
                                    std::size_t n_opt) {
    std::vector<double> evals = mpinv::read_eigenvalues(eigs_path);
    std::size_t n = resolve_n(evals.size(), c_opt, n_opt);
    return mpinv::SampleSpectrum::from_eigenvalues(evals, n);
}

// Admissibility configuration shared by the estimation commands.  Default is
// the observed sample-support interval; --sigma2 switches to the
// deterministic interval [0, sigma2*(1+sqrt(c_n))^2]; --support supplies
// explicit intervals.
struct DomainFlags {
    double tau = 0.05;
    double kappa = 10.0;
    double sigma2 = 0.0;                  // >0 selects the deterministic mode
    std::vector<double> support_bounds;   // flattened lo hi pairs
};

void add_domain_flags(CLI::App* cmd, DomainFlags& f) {
    cmd->add_option("--tau", f.tau, "Inner scale / distance margin")
        ->capture_default_str();
    cmd->add_option("--kappa", f.kappa, "Outer modulus bound")
        ->capture_default_str();
    cmd->add_option("--sigma2", f.sigma2,
                    "Population variance bound; selects the deterministic "
                    "support interval [0, sigma2*(1+sqrt(c_n))^2]");
    cmd->add_option("--support", f.support_bounds,
                    "Explicit population support interval(s), flattened lo hi "
                    "pairs; overrides the sample-range default")
        ->expected(-2);
}

mpinv::DomainConfig make_domain_config(const DomainFlags& f,
                                       const mpinv::SampleSpectrum& spec) {
    if (f.sigma2 > 0.0 && !f.support_bounds.empty())
        throw mpinv::argument_error("--sigma2 and --support are mutually exclusive");
    mpinv::DomainConfig cfg;
    if (f.sigma2 > 0.0) {
        cfg.mode = mpinv::DomainMode::ReplacementSafe;
        cfg.sigma2 = f.sigma2;
        cfg.sigma2_defaulted = false;
        cfg.tau = f.tau;
        cfg.kappa = f.kappa;
    } else if (!f.support_bounds.empty()) {
        if (f.support_bounds.size() % 2 != 0)
            throw mpinv::argument_error("--support expects lo hi pairs");
        cfg.mode = mpinv::DomainMode::SupportSupplied;
        cfg.tau = f.tau;
        cfg.kappa = f.kappa;
        for (std::size_t i = 0; i + 1 < f.support_bounds.size(); i += 2)
            cfg.nu_support.push_back(
                {f.support_bounds[i], f.support_bounds[i + 1]});
    } else {
        cfg = mpinv::sample_support_config(spec, f.tau, f.kappa);
    }
    cfg.validate();
    return cfg;
}

struct CurveFlags {
    std::vector<double> rect;  // a b h
    std::string file;
};

void add_curve_flags(CLI::App* cmd, CurveFlags& f, const char* name = "--curve",
                     const char* file_name = "--curve-file") {
    auto* rect = cmd->add_option(name, f.rect,
                                 "Rectangle curve: a b h (encloses (a, b), "
                                 "height h)")
                     ->expected(3);
    cmd->add_option(file_name, f.file, "Curve JSON file")->excludes(rect);
}

mpinv::PolylineCurve make_curve(const CurveFlags& f) {
    if (!f.rect.empty())
        return mpinv::rectangle_curve(f.rect[0], f.rect[1], f.rect[2]);
    if (!f.file.empty()) return mpinv::read_curve_json(f.file);
    throw mpinv::argument_error("provide --curve a b h or --curve-file");
}

std::string describe_failure(const mpinv::MembershipDiagnostics& d) {
    if (!d.in_upper) return "not in the upper half-plane";
    if (!d.cond_modulus)
        return "point modulus outside (tau, kappa): |z| = " +
               std::to_string(d.abs_z);
    if (!d.cond_exists)
        return "estimate does not exist: " + mpinv::to_string(d.failure_reason) +
               " (ratio " + std::to_string(d.ratio) + ")";
    if (!d.cond_phi_modulus)
        return "mapped modulus outside (tau, kappa): |phi| = " +
               std::to_string(d.abs_phi);
    if (!d.cond_dist_eigs)
        return "mapped point too close to a sample eigenvalue: dist = " +
               std::to_string(d.dist_eigs);
    if (!d.cond_dist_support)
        return "mapped point too close to the population support interval: "
               "dist = " +
               std::to_string(d.dist_support);
    return "unknown";
}

// Prints the failing nodes of an inadmissible curve and returns exit code 4.
int report_inadmissible(const mpinv::AdmissibilityReport& rep) {
    std::cerr << "error: integration curve is not admissible ("
              << rep.failures.size() << " failing node(s))\n";
    std::size_t shown = 0;
    for (const mpinv::NodeFailure& f : rep.failures) {
        if (shown++ == 10) {
            std::cerr << "  ... " << (rep.failures.size() - 10) << " more\n";
            break;
        }
        std::cerr << "  node " << f.node_index << " at (" << f.z.real() << ", "
                  << f.z.imag() << "): " << describe_failure(f.diag) << "\n";
    }
    return 4;
}

double imag_residue(cpx raw) {
    return std::abs(raw.imag()) / std::max(1.0, std::abs(raw.real()));
}

std::vector<double> linspace(double x0, double x1, std::size_t m) {
    if (m < 1) throw mpinv::argument_error("grid needs at least one point");
    std::vector<double> xs(m);
    if (m == 1) {
        xs[0] = x0;
        return xs;
    }
    for (std::size_t i = 0; i < m; ++i)
        xs[i] = x0 + (x1 - x0) * static_cast<double>(i) /
                         static_cast<double>(m - 1);
    return xs;
}

// ---------------------------------------------------------------------------
// command options

struct EigsOpts {
    std::string matrix_path;
    std::string out;
};

struct StieltjesOpts {
    std::string eigs_path;
    double c = 0.0;
    std::size_t n = 0;
    std::string points;
    std::string points_file;
    std::string out;
};

struct DomainMapOpts {
    std::string eigs_path;
    double c = 0.0;
    std::size_t n = 0;
    DomainFlags domain;
    std::vector<double> bbox;  // re_min re_max im_min im_max
    std::vector<std::size_t> res;
    std::string out;
};

struct PlssOpts {
    std::string eigs_path;
    double c = 0.0;
    std::size_t n = 0;
    std::string g = "identity";
    CurveFlags curve;
    DomainFlags domain;
    std::size_t nodes = 64;
    bool json = false;
    std::string out;
};

struct GlssOpts {
    std::string eigs_path;
    double c = 0.0;
    std::size_t n = 0;
    std::string f = "identity";
    std::string g = "identity";
    CurveFlags curve_g;
    CurveFlags curve_f;
    DomainFlags domain;
    std::size_t nodes_g = 64;
    std::size_t nodes_f = 72;
    std::size_t grid_exp = 2;
    bool json = false;
    std::string out;
};

struct CiOpts {
    std::string eigs_path;
    double c = 0.0;
    std::size_t n = 0;
    std::string g = "identity";
    CurveFlags curve;
    DomainFlags domain;
    std::size_t nodes = 64;
    double alpha = 0.05;
    int beta = 1;
    std::string out;
};

struct SimulateOpts {
    std::string model = "two-atom";
    std::vector<std::size_t> dims;
    std::size_t reps = 50;
    std::string task = "plss";
    std::string g = "cube";
    std::vector<double> curve = {0.2, 1.4, 0.5};
    std::size_t nodes = 64;
    double alpha = 0.05;
    int beta = 1;
    double tau = 0.05;
    double kappa = 10.0;
    std::uint64_t seed = 42;
    std::vector<double> point = {1.0, 1.0};
    bool no_admissibility = false;
    std::string out;
};

struct ForwardOpts {
    std::string H;
    double c = 0.0;
    std::vector<double> grid;  // x0 x1 m
    double eta = 1e-3;
    std::string out;
};

// ---------------------------------------------------------------------------
// command implementations

int run_eigs(const EigsOpts& o) {
    Eigen::MatrixXd Y = mpinv::read_matrix_csv(o.matrix_path);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(Y.rows(), Y.rows());
    S.selfadjointView<Eigen::Lower>().rankUpdate(
        Y, 1.0 / static_cast<double>(Y.cols()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.compute(S, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw mpinv::numerical_error("sample covariance eigensolve failed");
    std::vector<double> evals(solver.eigenvalues().data(),
                              solver.eigenvalues().data() + Y.rows());
    if (o.out.empty()) {
        std::ostringstream s;
        for (double v : evals) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            s << buf << '\n';
        }
        std::cout << s.str();
    } else {
        mpinv::write_eigenvalues(o.out, evals);
    }
    return 0;
}

std::vector<cpx> parse_points(const StieltjesOpts& o) {
    std::vector<cpx> pts;
    auto parse_pair = [](const std::string& s, const std::string& ctx) {
        std::size_t comma = s.find(',');
        if (comma == std::string::npos)
            throw mpinv::argument_error("point '" + s + "' " + ctx +
                                        " must be re,im");
        try {
            double re = std::stod(s.substr(0, comma));
            double im = std::stod(s.substr(comma + 1));
            return cpx(re, im);
        } catch (const std::exception&) {
            throw mpinv::argument_error("point '" + s + "' " + ctx +
                                        " must be re,im");
        }
    };
    if (!o.points.empty()) {
        std::stringstream ss(o.points);
        std::string item;
        while (std::getline(ss, item, ';'))
            if (!item.empty()) pts.push_back(parse_pair(item, "(--points)"));
    }
    if (!o.points_file.empty()) {
        std::ifstream in(o.points_file);
        if (!in)
            throw mpinv::io_error("cannot open points file '" + o.points_file + "'", 0);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            pts.push_back(parse_pair(line, "(line " + std::to_string(lineno) + ")"));
        }
    }
    if (pts.empty())
        throw mpinv::argument_error("no evaluation points given (--points / --points-file)");
    return pts;
}

int run_stieltjes(const StieltjesOpts& o) {
    mpinv::SampleSpectrum spec = load_spectrum(o.eigs_path, o.c, o.n);
    std::vector<cpx> pts = parse_points(o);
    std::vector<mpinv::InversionResult> results(pts.size());
    mpinv::parallel_for(pts.size(), [&](std::size_t i) {
        results[i] = mpinv::estimate_stieltjes_ext(spec, pts[i]);
    });
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const mpinv::InversionResult& r = results[i];
        ordered_json j;
        j["z"] = cpx_json(pts[i]);
        j["exists"] = r.exists;
        j["s_hat"] = cpx_json(r.s_hat);
        j["phi_hat"] = cpx_json(r.phi_hat);
        j["iterations"] = r.iterations;
        j["ratio"] = r.ratio;
        j["failure_reason"] = mpinv::to_string(r.failure_reason);
        arr.push_back(j);
    }
    emit(o.out, arr.dump(2) + "\n");
    return 0;
}

int run_domain_map(const DomainMapOpts& o) {
    mpinv::SampleSpectrum spec = load_spectrum(o.eigs_path, o.c, o.n);
    if (o.bbox.size() != 4)
        throw mpinv::argument_error("--bbox expects re_min re_max im_min im_max");
    if (o.res.size() != 2)
        throw mpinv::argument_error("--res expects nx ny");
    mpinv::BoundingBox bbox{o.bbox[0], o.bbox[1], o.bbox[2], o.bbox[3]};
    if (!(bbox.re_min < bbox.re_max) || !(bbox.im_min < bbox.im_max) ||
        !(bbox.im_min > 0.0))
        throw mpinv::argument_error(
            "bounding box must satisfy re_min < re_max, 0 < im_min < im_max");
    // Raster default: the deterministic support interval with the variance
    // heuristic, matching the estimation-free map use case.
    mpinv::DomainConfig cfg;
    if (o.domain.sigma2 > 0.0 || !o.domain.support_bounds.empty())
        cfg = make_domain_config(o.domain, spec);
    else
        cfg = mpinv::default_domain_config(spec, o.domain.tau, o.domain.kappa);
    mpinv::RasterGrid grid =
        mpinv::rasterize(spec, cfg, bbox, o.res[0], o.res[1]);
    std::ostringstream out;
    out << "re,im,member,abs_phi,dist_eigs,dist_interval,ratio\n";
    for (const mpinv::RasterCell& cell : grid.cells) {
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g\n",
                      cell.re, cell.im, cell.member ? 1 : 0, cell.abs_phi,
                      cell.dist_eigs, cell.dist_interval, cell.ratio);
        out << buf;
    }
    emit(o.out, out.str());
    return 0;
}

int run_plss(const PlssOpts& o) {
    mpinv::SampleSpectrum spec = load_spectrum(o.eigs_path, o.c, o.n);
    mpinv::PolylineCurve curve = make_curve(o.curve);
    mpinv::QuadratureRule rule = mpinv::quadrature(curve, o.nodes);
    mpinv::DomainConfig cfg = make_domain_config(o.domain, spec);
    mpinv::AdmissibilityReport rep =
        mpinv::validate_admissible(curve, spec, cfg, rule);
    if (!rep.admissible) return report_inadmissible(rep);
    mpinv::HoloFunction g = mpinv::builtin_holo(o.g);
    mpinv::PlssEstimate est = mpinv::plss_estimate(spec, g, curve, rule);
    if (o.json) {
        ordered_json j;
        j["estimate"] = est.value;
        j["curve"] = curve_json(curve);
        j["admissible"] = true;
        j["nodes"] = est.nodes;
        j["imag_residue"] = imag_residue(est.raw);
        emit(o.out, j.dump(2) + "\n");
    } else {
        std::ostringstream s;
        s << "estimate      " << est.value << "\n"
          << "observable    " << o.g << "\n"
          << "interval      (" << curve.a << ", " << curve.b << ")\n"
          << "nodes         " << est.nodes << "\n"
          << "imag_residue  " << imag_residue(est.raw) << "\n"
          << "admissible    yes\n";
        emit(o.out, s.str());
    }
    return 0;
}

int run_glss(const GlssOpts& o) {
    mpinv::SampleSpectrum spec = load_spectrum(o.eigs_path, o.c, o.n);
    mpinv::PolylineCurve curve_g = make_curve(o.curve_g);
    mpinv::PolylineCurve curve_f = make_curve(o.curve_f);

    // Population-side endpoints must lie on the admissible-endpoint grid
    // {k / n^K}; snap and rebuild.
    std::vector<cpx> vs = curve_g.vertices;
    double a_snap = mpinv::snap_to_grid(curve_g.a, spec.n, o.grid_exp);
    double b_snap = mpinv::snap_to_grid(curve_g.b, spec.n, o.grid_exp);
    vs.front() = cpx(b_snap, 0.0);
    vs.back() = cpx(a_snap, 0.0);
    curve_g = mpinv::PolylineCurve::create(std::move(vs));

    mpinv::DomainConfig cfg = make_domain_config(o.domain, spec);
    mpinv::PairReport pair =
        mpinv::validate_pair(curve_g, curve_f, spec, cfg, o.grid_exp);
    if (!pair.ok) {
        std::cerr << "error: curve pair failed validation\n";
        if (!pair.curve_g_admissible) {
            mpinv::AdmissibilityReport rep;
            rep.admissible = false;
            rep.failures = pair.g_failures;
            report_inadmissible(rep);
        }
        if (!pair.endpoints_on_grid)
            std::cerr << "  population-side endpoints are off the sample grid\n";
        if (!pair.f_node_failures.empty())
            std::cerr << "  " << pair.f_node_failures.size()
                      << " sample-side node(s) violate the modulus/support "
                         "conditions\n";
        if (!pair.separation_ok)
            std::cerr << "  curves are too close under the sample-to-population "
                         "map: min separation "
                      << pair.min_separation << "\n";
        return 4;
    }

    mpinv::HoloFunction f = mpinv::builtin_holo(o.f);
    mpinv::HoloFunction g = mpinv::builtin_holo(o.g);
    mpinv::QuadratureRule rule_g = mpinv::quadrature(curve_g, o.nodes_g);
    mpinv::QuadratureRule rule_f = mpinv::quadrature(curve_f, o.nodes_f);
    mpinv::GlssEstimate est =
        mpinv::glss_estimate(spec, f, g, curve_f, curve_g, rule_g, rule_f);
    if (o.json) {
        ordered_json j;
        j["estimate"] = est.value;
        j["imag_residue"] = est.imag_residue;
        j["curve_g"] = curve_json(curve_g);
        j["curve_f"] = curve_json(curve_f);
        j["pair_ok"] = true;
        j["min_separation"] = pair.min_separation;
        emit(o.out, j.dump(2) + "\n");
    } else {
        std::ostringstream s;
        s << "estimate        " << est.value << "\n"
          << "sample obs      " << o.f << "\n"
          << "population obs  " << o.g << "\n"
          << "imag_residue    " << est.imag_residue << "\n"
          << "min_separation  " << pair.min_separation << "\n";
        emit(o.out, s.str());
    }
    return 0;
}

int run_ci(const CiOpts& o) {
    mpinv::SampleSpectrum spec = load_spectrum(o.eigs_path, o.c, o.n);
    mpinv::PolylineCurve curve = make_curve(o.curve);
    mpinv::QuadratureRule rule1 = mpinv::quadrature(curve, o.nodes);
    mpinv::QuadratureRule rule2 = mpinv::quadrature(curve, o.nodes + 8);
    mpinv::DomainConfig cfg = make_domain_config(o.domain, spec);
    mpinv::AdmissibilityReport rep =
        mpinv::validate_admissible(curve, spec, cfg, rule1);
    if (!rep.admissible) return report_inadmissible(rep);
    mpinv::HoloFunction g = mpinv::builtin_holo(o.g);
    mpinv::CltConfig ccfg;
    ccfg.alpha = o.alpha;
    ccfg.beta = o.beta;
    mpinv::CiResult ci =
        mpinv::confidence_interval(spec, g, curve, rule1, rule2, ccfg);
    ordered_json j;
    j["estimate"] = ci.estimate;
    j["mu_n"] = ci.mu_n;
    j["sigma2_n"] = ci.sigma2_n;
    j["lo"] = ci.lo;
    j["hi"] = ci.hi;
    j["alpha"] = ci.alpha;
    j["beta"] = ci.beta;
    emit(o.out, j.dump(2) + "\n");
    return 0;
}

int run_simulate(const SimulateOpts& o) {
    if (o.dims.empty())
        throw mpinv::argument_error("--dims requires at least one dimension");
    mpinv::ModelKind kind;
    if (o.model == "two-atom")
        kind = mpinv::ModelKind::TwoAtomGaussian;
    else if (o.model == "ramp")
        kind = mpinv::ModelKind::RampRademacher;
    else
        throw mpinv::argument_error("--model must be two-atom or ramp");

    mpinv::McTask task;
    if (o.task == "plss")
        task.kind = mpinv::McTaskKind::Plss;
    else if (o.task == "ci-coverage")
        task.kind = mpinv::McTaskKind::CiCoverage;
    else if (o.task == "stieltjes")
        task.kind = mpinv::McTaskKind::Stieltjes;
    else
        throw mpinv::argument_error("--task must be plss, ci-coverage or stieltjes");
    if (task.kind != mpinv::McTaskKind::Stieltjes)
        task.g = mpinv::builtin_holo(o.g);
    if (o.curve.size() != 3)
        throw mpinv::argument_error("--curve expects a b h");
    task.curve_a = o.curve[0];
    task.curve_b = o.curve[1];
    task.curve_h = o.curve[2];
    task.nodes = o.nodes;
    task.alpha = o.alpha;
    task.beta = o.beta;
    task.tau = o.tau;
    task.kappa = o.kappa;
    task.check_admissible = !o.no_admissibility;
    if (o.point.size() != 2)
        throw mpinv::argument_error("--point expects re im");
    task.stieltjes_point = cpx(o.point[0], o.point[1]);

    std::vector<mpinv::ModelSpec> family;
    for (std::size_t d : o.dims) {
        mpinv::ModelSpec spec;
        spec.kind = kind;
        spec.d = d;
        family.push_back(spec);
    }
    mpinv::McTable table = mpinv::monte_carlo(family, task, o.reps, o.seed);

    std::size_t failures = 0;
    for (const mpinv::McRow& r : table.rows) failures += r.failed ? 1 : 0;
    if (failures == table.rows.size())
        throw mpinv::numerical_error("all replications failed");
    if (failures > 0)
        std::cerr << "warning: " << failures << " of " << table.rows.size()
                  << " replications failed\n";

    if (o.out.empty()) {
        std::ostringstream s;
        s << "d,rep,estimate,truth,error,abs_error,runtime_s,failed\n";
        for (const mpinv::McRow& r : table.rows) {
            char buf[240];
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                          r.d, r.rep, r.estimate, r.truth, r.error, r.abs_error,
                          r.runtime_s, r.failed ? 1 : 0);
            s << buf;
        }
        std::cout << s.str();
    } else {
        mpinv::write_mc_table_csv(o.out, table);
    }
    return 0;
}

mpinv::DiscreteMeasure parse_measure(const std::string& text) {
    std::vector<double> atoms, weights;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw mpinv::argument_error("--H entries must be atom:weight, got '" +
                                        item + "'");
        try {
            atoms.push_back(std::stod(item.substr(0, colon)));
            weights.push_back(std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw mpinv::argument_error("--H entries must be atom:weight, got '" +
                                        item + "'");
        }
    }
    return mpinv::DiscreteMeasure::from_atoms(atoms, weights);
}

int run_forward(const ForwardOpts& o) {
    mpinv::DiscreteMeasure H = parse_measure(o.H);
    if (!(o.c > 0.0)) throw mpinv::argument_error("--c must be positive");
    if (o.grid.size() != 3)
        throw mpinv::argument_error("--grid expects x0 x1 m");
    std::size_t m = static_cast<std::size_t>(o.grid[2]);
    if (o.grid[2] <= 0 || static_cast<double>(m) != o.grid[2])
        throw mpinv::argument_error("grid point count must be a positive integer");
    std::vector<double> xs = linspace(o.grid[0], o.grid[1], m);

    mpinv::ForwardModel model(H, o.c);
    std::vector<cpx> s(xs.size());
    mpinv::parallel_for(xs.size(), [&](std::size_t i) {
        try {
            s[i] = mpinv::solve_mp(model, cpx(xs[i], o.eta));
        } catch (const mpinv::iteration_error& e) {
            throw mpinv::iteration_error(
                "grid point " + std::to_string(i) + " (x = " +
                    std::to_string(xs[i]) + "): " + e.what(),
                e.residual, e.iterations);
        }
    });
    std::vector<double> density(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        density[i] = s[i].imag() / M_PI;

    if (o.out.empty()) {
        std::ostringstream out;
        out << "x,density,re_s,im_s\n";
        for (std::size_t k = 0; k < xs.size(); ++k) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", xs[k],
                          density[k], s[k].real(), s[k].imag());
            out << buf;
        }
        std::cout << out.str();
    } else {
        mpinv::write_forward_csv(o.out, xs, density, s);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "mpinv: population spectral statistics from sample covariance "
        "eigenvalues"};
    app.require_subcommand(1);

    EigsOpts eigs;
    auto* cmd_eigs = app.add_subcommand(
        "eigs", "Eigenvalues of (1/n) Y Y^T from a data matrix CSV");
    cmd_eigs->add_option("matrix", eigs.matrix_path, "Data matrix CSV (d rows, n columns)")
        ->required();
    cmd_eigs->add_option("-o,--output", eigs.out, "Output eigenvalue file");

    StieltjesOpts st;
    auto* cmd_st = app.add_subcommand(
        "stieltjes", "Population Stieltjes-transform estimates at points");
    cmd_st->add_option("eigs", st.eigs_path, "Eigenvalue file")->required();
    cmd_st->add_option("--c", st.c, "Aspect ratio d/n");
    cmd_st->add_option("--n", st.n, "Sample count");
    cmd_st->add_option("--points", st.points, "Semicolon-separated re,im pairs");
    cmd_st->add_option("--points-file", st.points_file, "File of re,im lines");
    cmd_st->add_option("-o,--output", st.out, "Output JSON file");

    DomainMapOpts dm;
    auto* cmd_dm = app.add_subcommand(
        "domain-map", "Rasterize the empirical spectral domain");
    cmd_dm->add_option("eigs", dm.eigs_path, "Eigenvalue file")->required();
    cmd_dm->add_option("--c", dm.c, "Aspect ratio d/n");
    cmd_dm->add_option("--n", dm.n, "Sample count");
    add_domain_flags(cmd_dm, dm.domain);
    cmd_dm->add_option("--bbox", dm.bbox, "re_min re_max im_min im_max")
        ->expected(4)
        ->required();
    cmd_dm->add_option("--res", dm.res, "nx ny")->expected(2)->required();
    cmd_dm->add_option("-o,--output", dm.out, "Output CSV file");

    PlssOpts pl;
    auto* cmd_pl = app.add_subcommand(
        "plss", "Population linear spectral statistic over a curve");
    cmd_pl->add_option("eigs", pl.eigs_path, "Eigenvalue file")->required();
    cmd_pl->add_option("--c", pl.c, "Aspect ratio d/n");
    cmd_pl->add_option("--n", pl.n, "Sample count");
    cmd_pl->add_option("--g", pl.g, "Observable name")->required();
    add_curve_flags(cmd_pl, pl.curve);
    add_domain_flags(cmd_pl, pl.domain);
    cmd_pl->add_option("--nodes", pl.nodes, "Quadrature nodes per segment")
        ->capture_default_str();
    cmd_pl->add_flag("--json", pl.json, "Emit JSON instead of a table");
    cmd_pl->add_option("-o,--output", pl.out, "Output file");

    GlssOpts gl;
    auto* cmd_gl = app.add_subcommand(
        "glss", "Generalized (two-function) spectral statistic");
    cmd_gl->add_option("eigs", gl.eigs_path, "Eigenvalue file")->required();
    cmd_gl->add_option("--c", gl.c, "Aspect ratio d/n");
    cmd_gl->add_option("--n", gl.n, "Sample count");
    cmd_gl->add_option("--f", gl.f, "Sample-side observable")->required();
    cmd_gl->add_option("--g", gl.g, "Population-side observable")->required();
    add_curve_flags(cmd_gl, gl.curve_g, "--curve-g", "--curve-g-file");
    add_curve_flags(cmd_gl, gl.curve_f, "--curve-f", "--curve-f-file");
    add_domain_flags(cmd_gl, gl.domain);
    cmd_gl->add_option("--nodes-g", gl.nodes_g, "Population-side nodes per segment")
        ->capture_default_str();
    cmd_gl->add_option("--nodes-f", gl.nodes_f, "Sample-side nodes per segment")
        ->capture_default_str();
    cmd_gl->add_option("--grid-exp", gl.grid_exp, "Endpoint grid exponent K")
        ->capture_default_str();
    cmd_gl->add_flag("--json", gl.json, "Emit JSON instead of a table");
    cmd_gl->add_option("-o,--output", gl.out, "Output file");

    CiOpts ci;
    auto* cmd_ci = app.add_subcommand(
        "ci", "Confidence interval for a population statistic");
    cmd_ci->add_option("eigs", ci.eigs_path, "Eigenvalue file")->required();
    cmd_ci->add_option("--c", ci.c, "Aspect ratio d/n");
    cmd_ci->add_option("--n", ci.n, "Sample count");
    cmd_ci->add_option("--g", ci.g, "Observable name")->required();
    add_curve_flags(cmd_ci, ci.curve);
    add_domain_flags(cmd_ci, ci.domain);
    cmd_ci->add_option("--nodes", ci.nodes, "Quadrature nodes per segment")
        ->capture_default_str();
    cmd_ci->add_option("--alpha", ci.alpha, "Miscoverage level")
        ->capture_default_str();
    cmd_ci->add_option("--beta", ci.beta, "Ensemble symmetry index (1 or 2)")
        ->capture_default_str();
    cmd_ci->add_option("-o,--output", ci.out, "Output JSON file");

    SimulateOpts sim;
    auto* cmd_sim = app.add_subcommand(
        "simulate", "Seeded Monte Carlo experiment table");
    cmd_sim->add_option("--model", sim.model,
                        "Synthetic model: two-atom or ramp")
        ->capture_default_str();
    cmd_sim->add_option("--dims", sim.dims, "Dimensions, e.g. 50,200")
        ->required()
        ->delimiter(',');
    cmd_sim->add_option("--reps", sim.reps, "Replications per dimension")
        ->capture_default_str();
    cmd_sim->add_option("--task", sim.task, "plss, ci-coverage or stieltjes")
        ->capture_default_str();
    cmd_sim->add_option("--g", sim.g, "Observable name")->capture_default_str();
    cmd_sim->add_option("--curve", sim.curve, "Rectangle a b h")->expected(3);
    cmd_sim->add_option("--nodes", sim.nodes, "Quadrature nodes per segment")
        ->capture_default_str();
    cmd_sim->add_option("--alpha", sim.alpha, "Miscoverage level")
        ->capture_default_str();
    cmd_sim->add_option("--beta", sim.beta, "Ensemble symmetry index")
        ->capture_default_str();
    cmd_sim->add_option("--tau", sim.tau, "Admissibility inner scale")
        ->capture_default_str();
    cmd_sim->add_option("--kappa", sim.kappa, "Admissibility outer bound")
        ->capture_default_str();
    cmd_sim->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
    cmd_sim->add_option("--point", sim.point, "Stieltjes probe re im")
        ->expected(2);
    cmd_sim->add_flag("--no-admissibility", sim.no_admissibility,
                      "Skip per-replication curve validation");
    cmd_sim->add_option("-o,--output", sim.out, "Output CSV file");

    ForwardOpts fw;
    auto* cmd_fw = app.add_subcommand(
        "forward", "Limiting sample spectral density for a population model");
    cmd_fw->add_option("--H", fw.H, "Population measure atom:weight,...")
        ->required();
    cmd_fw->add_option("--c", fw.c, "Aspect ratio")->required();
    cmd_fw->add_option("--grid", fw.grid, "x0 x1 m")->expected(3)->required();
    cmd_fw->add_option("--eta", fw.eta, "Evaluation height above the axis")
        ->capture_default_str();
    cmd_fw->add_option("-o,--output", fw.out, "Output CSV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_eigs->parsed()) return run_eigs(eigs);
        if (cmd_st->parsed()) return run_stieltjes(st);
        if (cmd_dm->parsed()) return run_domain_map(dm);
        if (cmd_pl->parsed()) return run_plss(pl);
        if (cmd_gl->parsed()) return run_glss(gl);
        if (cmd_ci->parsed()) return run_ci(ci);
        if (cmd_sim->parsed()) return run_simulate(sim);
        if (cmd_fw->parsed()) return run_forward(fw);
    } catch (const mpinv::argument_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mpinv::io_error& e) {
        std::cerr << "error: " << e.what();
        if (e.line > 0) std::cerr << " (line " << e.line << ")";
        std::cerr << "\n";
        return 2;
    } catch (const mpinv::iteration_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const mpinv::estimation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const mpinv::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
