#pragma once

#include <Eigen/Dense>

#include "psstn/tensor.hpp"

namespace psstn {

/// U_{0|k-1} = W diag(T) Q^T with W kept as a tensor network.
struct SvdBundle {
  Mpo W;              ///< km^d x N, orthonormal columns
  Eigen::VectorXd T;  ///< N singular values, nonincreasing
  Eigen::MatrixXd Q;  ///< N x N orthogonal
  Index r = 0;        ///< partition point (persistence rank)
  Index observed_rank = 0;

  /// T(r-1) / T(r).
  double rank_gap() const;
};

enum class Orthogonalize {
  kSweep,  ///< QR each of the first d-1 cores and absorb R to the right
  kSkip,   ///< cores are already left-orthonormal (output of rkh2tn)
};

/// Economical SVD of the folded input block Hankel network: last core
/// (r_d, mk, N, 1) with r_d*m*k >= N. `r` is the expected rank.
SvdBundle tn_econ_svd(const Mpo& u, Index r, Orthogonalize mode = Orthogonalize::kSweep);

struct LFactors {
  Mpo L11_inverse;     ///< r x km^d: T1^{-1} W1^T
  Eigen::MatrixXd L21;  ///< kp x r: Y Q1
  Eigen::MatrixXd L22;  ///< kp x (N - r): Y Q2
};

/// L21 = Y Q1, L22 = Y Q2, and (when requested) the network of
/// L11^{-1} = T1^{-1} W1^T. Throws NotPersistentlyExciting when T1 is
/// numerically singular.
LFactors make_l_factors(const SvdBundle& bundle, const Eigen::MatrixXd& Y, bool with_inverse = true);

/// Throws NotPersistentlyExciting unless the first r singular values are
/// numerically nonzero.
void require_invertible_t1(const SvdBundle& bundle);

}  // namespace psstn
