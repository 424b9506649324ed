#pragma once

#include <Eigen/Dense>

#include <optional>

#include "psstn/tensor.hpp"

namespace psstn {

/// Thin SVD a = U * diag(s) * V^T.
struct SvdResult {
  Eigen::MatrixXd U;
  Eigen::VectorXd s;
  Eigen::MatrixXd V;
};

struct QrResult {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
};

/// Economical SVD with min(rows, cols) singular triplets, sorted
/// nonincreasing. Each left singular vector is signed so that its
/// largest-magnitude entry (lowest index on ties) is positive; the matching
/// right vector flips with it. Throws NonFiniteInput on NaN/Inf.
SvdResult svd_econ(const Eigen::MatrixXd& a);

/// Thin QR of a tall matrix, with R's diagonal made nonnegative.
QrResult qr_thin(const Eigen::MatrixXd& a);

/// Default rank tolerance max(rows, cols) * eps * s_max.
double default_rank_tolerance(const Eigen::VectorXd& s, Index rows, Index cols);

/// Number of singular values strictly above `tol`.
Index numerical_rank(const Eigen::VectorXd& s, double tol);

/// numerical_rank with the default tolerance for a rows x cols matrix.
Index numerical_rank(const Eigen::VectorXd& s, Index rows, Index cols);

/// Moore-Penrose pseudoinverse; singular values at or below `tol` (default
/// rule when absent) are treated as zero.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& a, std::optional<double> tol = std::nullopt);

/// s(r-1) / s(r): ratio of the last kept to the first dropped singular
/// value. Infinity when the dropped value is zero or r == s.size().
double rank_gap(const Eigen::VectorXd& s, Index r);

}  // namespace psstn
