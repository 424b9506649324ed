#pragma once

#include <Eigen/Dense>

#include "psstn/tensor.hpp"

namespace psstn {

/// Sequential-SVD construction of a tensor-train matrix from a dense matrix
/// whose rows and columns are grouped by `row_dims` and `col_dims`.
/// Singular values at or below rel_tol * (largest at that bond) are dropped.
Mpo mpo_from_dense(const Eigen::MatrixXd& a, const Dims& row_dims, const Dims& col_dims,
                   double rel_tol = 1e-14);

/// Restores minimal ranks: right-to-left orthogonalization followed by a
/// left-to-right truncated SVD sweep at relative tolerance `rel_tol`.
Mpo recompress(const Mpo& tn, double rel_tol = 1e-12);

/// Makes column 0 of the represented matrix exactly zero while changing the
/// rest by rounding-level amounts. A Householder reflection at every bond
/// rotates the partial chain for column index 0 onto the first basis vector
/// (its tail is then set to exact zeros), and the column-0 slice of the last
/// core is cleared on that leading rank index. Requires row dims 1 on all but
/// the last core.
Mpo zero_first_column(const Mpo& tn);

}  // namespace psstn
