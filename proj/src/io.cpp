#include "mpinv/io.hpp"

#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mpinv/errors.hpp"

namespace mpinv {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Parses a full double, rejecting trailing garbage and empty fields.
double parse_double(const std::string& field, const std::string& path,
                    std::size_t line) {
    const char* begin = field.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r'))
        ++end;
    if (end == begin || end == nullptr || *end != '\0')
        throw io_error(path + ": malformed number '" + field + "'", line);
    if (errno == ERANGE)
        throw io_error(path + ": number out of range '" + field + "'", line);
    return v;
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    fs::path tmp = (dir.empty() ? fs::path(".") : dir) /
                   (target.filename().string() + ".tmp" +
                    std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open '" + tmp.string() + "' for writing", 0);
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw io_error("write failed for '" + tmp.string() + "'", 0);
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::error_code ec2;
        fs::remove(tmp, ec2);
        throw io_error("cannot rename temporary file onto '" + path +
                           "': " + ec.message(),
                       0);
    }
}

std::vector<double> read_eigenvalues(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open eigenvalue file '" + path + "'", 0);
    std::vector<double> evals;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = strip(line);
        if (t.empty()) continue;
        evals.push_back(parse_double(t, path, lineno));
    }
    if (evals.empty())
        throw io_error("eigenvalue file '" + path + "' contains no values", lineno);
    return evals;
}

void write_eigenvalues(const std::string& path,
                       const std::vector<double>& evals) {
    std::ostringstream out;
    for (double v : evals) out << format_double(v) << '\n';
    write_text_atomic(path, out.str());
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open matrix file '" + path + "'", 0);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = strip(line);
        if (t.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(t);
        std::string field;
        while (std::getline(ss, field, ','))
            row.push_back(parse_double(strip(field), path, lineno));
        if (!rows.empty() && row.size() != rows.front().size())
            throw io_error(path + ": row has " + std::to_string(row.size()) +
                               " columns, expected " +
                               std::to_string(rows.front().size()),
                           lineno);
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw io_error("matrix file '" + path + "' contains no data", lineno);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
    return m;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ostringstream out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

PolylineCurve read_curve_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open curve file '" + path + "'", 0);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path + ": " + e.what(), 0);
    }
    if (!j.is_object() || !j.contains("vertices") || !j["vertices"].is_array())
        throw io_error(path + ": expected an object with a 'vertices' array", 0);
    std::vector<cpx> vertices;
    for (const auto& v : j["vertices"]) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
            !v[1].is_number())
            throw io_error(path + ": vertices must be [re, im] number pairs", 0);
        vertices.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    PolylineCurve curve = PolylineCurve::create(std::move(vertices));
    if (j.contains("a") && j["a"].is_number() &&
        std::abs(j["a"].get<double>() - curve.a) > 1e-12)
        throw io_error(path + ": stored endpoint 'a' disagrees with vertices", 0);
    if (j.contains("b") && j["b"].is_number() &&
        std::abs(j["b"].get<double>() - curve.b) > 1e-12)
        throw io_error(path + ": stored endpoint 'b' disagrees with vertices", 0);
    return curve;
}

std::string curve_to_json(const PolylineCurve& curve) {
    nlohmann::ordered_json j;
    j["vertices"] = nlohmann::json::array();
    for (cpx v : curve.vertices)
        j["vertices"].push_back({v.real(), v.imag()});
    j["a"] = curve.a;
    j["b"] = curve.b;
    return j.dump(2) + "\n";
}

void write_curve_json(const std::string& path, const PolylineCurve& curve) {
    write_text_atomic(path, curve_to_json(curve));
}

void write_raster_csv(const std::string& path, const RasterGrid& grid) {
    std::ostringstream out;
    out << "re,im,member,abs_phi,dist_eigs,dist_interval,ratio\n";
    for (const RasterCell& c : grid.cells) {
        out << format_double(c.re) << ',' << format_double(c.im) << ','
            << (c.member ? 1 : 0) << ',' << format_double(c.abs_phi) << ','
            << format_double(c.dist_eigs) << ','
            << format_double(c.dist_interval) << ',' << format_double(c.ratio)
            << '\n';
    }
    write_text_atomic(path, out.str());
}

void write_mc_table_csv(const std::string& path, const McTable& table) {
    std::ostringstream out;
    out << "d,rep,estimate,truth,error,abs_error,runtime_s,failed\n";
    for (const McRow& r : table.rows) {
        out << r.d << ',' << r.rep << ',' << format_double(r.estimate) << ','
            << format_double(r.truth) << ',' << format_double(r.error) << ','
            << format_double(r.abs_error) << ','
            << format_double(r.runtime_s) << ',' << (r.failed ? 1 : 0) << '\n';
    }
    write_text_atomic(path, out.str());
}

void write_forward_csv(const std::string& path, const std::vector<double>& x,
                       const std::vector<double>& density,
                       const std::vector<cpx>& s) {
    if (x.size() != density.size() || x.size() != s.size())
        throw argument_error("forward scan columns have mismatched lengths");
    std::ostringstream out;
    out << "x,density,re_s,im_s\n";
    for (std::size_t k = 0; k < x.size(); ++k) {
        out << format_double(x[k]) << ',' << format_double(density[k]) << ','
            << format_double(s[k].real()) << ',' << format_double(s[k].imag())
            << '\n';
    }
    write_text_atomic(path, out.str());
}

}  // namespace mpinv
