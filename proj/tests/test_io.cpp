#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <mpinv/io.hpp>
#include <mpinv/simgen.hpp>

#include "test_helpers.hpp"

using namespace mpinv;
using namespace mpinv_test;
namespace fs = std::filesystem;

namespace {

// Fresh per-test scratch directory under the system temp root.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("mpinv_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("eigenvalue files round-trip exactly") {
    TempDir dir;
    std::vector<double> evals = {0.1,
                                 1.0 / 3.0,
                                 123456.78901234567,
                                 2.2250738585072014e-308,
                                 1.4972135954999579,
                                 0.0};
    std::string path = dir.file("evals.txt");
    write_eigenvalues(path, evals);
    std::vector<double> back = read_eigenvalues(path);
    REQUIRE(back.size() == evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) CHECK(back[i] == evals[i]);
}

TEST_CASE("eigenvalue parsing reports the offending line") {
    TempDir dir;
    std::string path = dir.file("bad.txt");
    write_text_atomic(path, "1.0\n\n  2.5  \nbogus\n3.0\n");
    try {
        read_eigenvalues(path);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(e.line == 4);
        CHECK(std::string(e.what()).find("bogus") != std::string::npos);
    }

    write_text_atomic(path, "\n   \n");
    CHECK_THROWS_AS(read_eigenvalues(path), io_error);
    CHECK_THROWS_AS(read_eigenvalues(dir.file("missing.txt")), io_error);

    // Trailing garbage after a valid prefix is rejected too.
    write_text_atomic(path, "1.5x\n");
    CHECK_THROWS_AS(read_eigenvalues(path), io_error);

    // Subnormals underflow strtod and are treated as out of range.
    write_text_atomic(path, "5e-324\n");
    CHECK_THROWS_AS(read_eigenvalues(path), io_error);
}

TEST_CASE("matrix CSV round-trips exactly") {
    TempDir dir;
    Eigen::MatrixXd m(2, 3);
    m << 0.1, -2.5e-13, 3.0, 1.0 / 7.0, -4.0, 9.999999999999998e22;
    std::string path = dir.file("m.csv");
    write_matrix_csv(path, m);
    Eigen::MatrixXd back = read_matrix_csv(path);
    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    CHECK(back == m);
}

TEST_CASE("matrix CSV rejects ragged and empty input") {
    TempDir dir;
    std::string path = dir.file("ragged.csv");
    write_text_atomic(path, "1,2,3\n4,5\n");
    try {
        read_matrix_csv(path);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(e.line == 2);
    }
    write_text_atomic(path, "");
    CHECK_THROWS_AS(read_matrix_csv(path), io_error);
    write_text_atomic(path, "1,abc\n");
    CHECK_THROWS_AS(read_matrix_csv(path), io_error);
}

TEST_CASE("curve JSON round-trips and validates") {
    TempDir dir;
    PolylineCurve curve = PolylineCurve::create(
        {cpx(1.4, 0.0), cpx(1.5, 0.5), cpx(0.1, 0.6), cpx(0.2, 0.0)});
    std::string path = dir.file("curve.json");
    write_curve_json(path, curve);
    PolylineCurve back = read_curve_json(path);
    REQUIRE(back.vertices.size() == curve.vertices.size());
    for (std::size_t i = 0; i < curve.vertices.size(); ++i)
        CHECK(back.vertices[i] == curve.vertices[i]);
    CHECK(back.a == curve.a);
    CHECK(back.b == curve.b);

    // Stored endpoints must agree with the vertex list.
    write_text_atomic(path,
                      "{\"vertices\": [[1.0,0.0],[0.5,0.5],[0.0,0.0]], "
                      "\"a\": 0.25}");
    CHECK_THROWS_AS(read_curve_json(path), io_error);

    write_text_atomic(path, "{\"vertices\": [[1.0],[0.0,0.0]]}");
    CHECK_THROWS_AS(read_curve_json(path), io_error);
    write_text_atomic(path, "not json at all");
    CHECK_THROWS_AS(read_curve_json(path), io_error);
    write_text_atomic(path, "{\"vertices\": 3}");
    CHECK_THROWS_AS(read_curve_json(path), io_error);
    // Structurally valid JSON describing an invalid curve.
    write_text_atomic(path, "{\"vertices\": [[1.0,0.0],[0.0,0.0]]}");
    CHECK_THROWS_AS(read_curve_json(path), argument_error);
}

TEST_CASE("atomic writes replace content without leftovers") {
    TempDir dir;
    std::string path = dir.file("out.txt");
    write_text_atomic(path, "old\n");
    write_text_atomic(path, "new\n");
    CHECK(slurp(path) == "new\n");
    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(dir.path)) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1);  // no temporary files left behind

    CHECK_THROWS_AS(
        write_text_atomic(dir.file("no_such_dir/out.txt"), "x"), io_error);
}

TEST_CASE("raster CSV layout") {
    SampleSpectrum s = two_atom_sample(20, 3);
    DomainConfig cfg = sample_support_config(s, 0.05, 10.0);
    RasterGrid grid = rasterize(s, cfg, {-1.0, 1.0, 0.2, 0.6}, 2, 1);
    TempDir dir;
    std::string path = dir.file("raster.csv");
    write_raster_csv(path, grid);
    std::string content = slurp(path);
    std::istringstream in(content);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "re,im,member,abs_phi,dist_eigs,dist_interval,ratio");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
    }
    CHECK(rows == grid.cells.size());
    // First cell center is at re = -0.5, im = 0.4.
    CHECK(content.find("-0.5,0.40000000000000002,") != std::string::npos);
}

TEST_CASE("monte carlo CSV serialization") {
    McTable table;
    McRow ok;
    ok.d = 30;
    ok.rep = 0;
    ok.estimate = 0.5625;
    ok.truth = 0.5625;
    ok.error = 0.0;
    ok.abs_error = 0.0;
    ok.runtime_s = 0.125;
    McRow bad;
    bad.d = 30;
    bad.rep = 1;
    bad.failed = true;
    bad.estimate = bad.truth = bad.error = bad.abs_error =
        std::numeric_limits<double>::quiet_NaN();
    table.rows = {ok, bad};

    TempDir dir;
    std::string path = dir.file("mc.csv");
    write_mc_table_csv(path, table);
    std::string content = slurp(path);
    CHECK(content.find("d,rep,estimate,truth,error,abs_error,runtime_s,failed\n") == 0);
    CHECK(content.find("30,0,0.5625,0.5625,0,0,0.125,0\n") != std::string::npos);
    CHECK(content.find("30,1,nan,nan,nan,nan,") != std::string::npos);
    CHECK(content.find(",1\n") != std::string::npos);
}

TEST_CASE("forward scan CSV") {
    TempDir dir;
    std::string path = dir.file("scan.csv");
    std::vector<double> x = {0.5, 1.0};
    std::vector<double> den = {1.0 / 3.0, 0.25};
    std::vector<cpx> s = {cpx(1.0, 2.0), cpx(-0.5, 0.125)};
    write_forward_csv(path, x, den, s);
    std::string content = slurp(path);
    CHECK(content.find("x,density,re_s,im_s\n") == 0);
    CHECK(content.find("0.5,0.33333333333333331,1,2\n") != std::string::npos);
    CHECK(content.find("1,0.25,-0.5,0.125\n") != std::string::npos);
    CHECK_THROWS_AS(write_forward_csv(path, x, {0.1}, s), argument_error);
}
