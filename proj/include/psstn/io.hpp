#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>

#include "psstn/model.hpp"

namespace psstn {

/// Binary model container:
///
///   "PSSTN1"
///   u32 n, m, p, d, r_1 .. r_{d+1}
///   f64 A (row-major), C (row-major), then every core of [D; B] in
///   column-major order, core k shaped (r_k, 1, m, r_{k+1}) and the last one
///   (r_d, p+n, m, 1)
///
/// All integers and floats are little-endian.
std::string serialize_model(const PolynomialStateSpace& model);
PolynomialStateSpace deserialize_model(const std::string& bytes);

void write_model(const std::filesystem::path& path, const PolynomialStateSpace& model);
PolynomialStateSpace read_model(const std::filesystem::path& path);

/// Signal CSV with header "t,u_1,...,u_{m-1},y_1,...,y_p". The constant
/// input is not stored. Either group of columns may be empty.
struct SignalTable {
  Eigen::MatrixXd inputs;   ///< L x (m-1)
  Eigen::MatrixXd outputs;  ///< L x p
};

std::string format_signal_csv(const SignalTable& table);
SignalTable parse_signal_csv(const std::string& text);

void write_signal_csv(const std::filesystem::path& path, const SignalTable& table);
SignalTable read_signal_csv(const std::filesystem::path& path);

/// Shortest round-trip representation ("%.17g").
std::string format_double(double value);

}  // namespace psstn
