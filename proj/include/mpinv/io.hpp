#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpinv/contours.hpp"
#include "mpinv/domain.hpp"
#include "mpinv/simgen.hpp"

namespace mpinv {

// All writers are atomic: content goes to a temporary file in the target
// directory which is renamed over the destination only after a full write.
void write_text_atomic(const std::string& path, const std::string& content);

// Eigenvalue list: plain text, one decimal float per line, no header.
std::vector<double> read_eigenvalues(const std::string& path);
void write_eigenvalues(const std::string& path,
                       const std::vector<double>& evals);

// Data matrix: CSV of d rows and n columns, no header.
Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

// Integration curve: JSON {"vertices": [[re, im], ...], "a": x, "b": x};
// the stored endpoints must agree with the vertex list.
PolylineCurve read_curve_json(const std::string& path);
std::string curve_to_json(const PolylineCurve& curve);
void write_curve_json(const std::string& path, const PolylineCurve& curve);

// Domain raster: CSV `re,im,member,abs_phi,dist_eigs,dist_interval,ratio`,
// one row per cell, row-major.
void write_raster_csv(const std::string& path, const RasterGrid& grid);

// Monte Carlo table: CSV
// `d,rep,estimate,truth,error,abs_error,runtime_s,failed`.
void write_mc_table_csv(const std::string& path, const McTable& table);

// Spectral-density scan: CSV `x,density,re_s,im_s`.
void write_forward_csv(const std::string& path, const std::vector<double>& x,
                       const std::vector<double>& density,
                       const std::vector<cpx>& s);

}  // namespace mpinv
