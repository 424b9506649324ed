#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "psstn/tensor.hpp"

namespace psstn {

/// Measured samples: `inputs` is L x (m-1) (the constant 1 is not stored),
/// `outputs` is L x p.
class SignalLog {
 public:
  SignalLog() = default;
  SignalLog(Eigen::MatrixXd inputs, Eigen::MatrixXd outputs);

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::MatrixXd& outputs() const { return outputs_; }
  Index samples() const { return inputs_.rows(); }
  /// m, counting the constant input.
  Index input_dim() const { return inputs_.cols() + 1; }
  Index output_dim() const { return outputs_.cols(); }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::MatrixXd outputs_;
};

struct HankelSizes {
  Index k = 0;  ///< block rows
  Index N = 0;  ///< columns
  Index r = 0;  ///< rank of the input block Hankel matrix for persistent inputs
};

struct HankelBundle {
  Eigen::MatrixXd Y;       ///< kp x N output block Hankel matrix
  Eigen::MatrixXd Utilde;  ///< m x kN augmented inputs, k consecutive samples per Hankel column
  Index k = 0;
  Index N = 0;
  Index r = 0;
  int d = 0;
};

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// k * C(d+m-1, m-1) - k + 1.
Index persistence_rank_bound(Index m, int d, Index k);

/// r_1..r_d with r_i = C(i-1+m-1, m-1).
std::vector<Index> tn_rank_bounds(Index m, int d);

/// k = floor(L / (p + C(d+m-1, m-1))), N = L - k + 1. Throws
/// InsufficientData when k < 2 or N < r + kp.
HankelSizes compute_k(Index L, Index m, Index p, int d);

/// (1, u_t^(1), ..., u_t^(m-1)) for every sample, as columns of an m x L matrix.
Eigen::MatrixXd augment_inputs(const Eigen::MatrixXd& raw_inputs);

/// kp x N output block Hankel matrix: block i of column j is y_{i+j}.
Eigen::MatrixXd output_block_hankel(const Eigen::MatrixXd& outputs, Index k, Index N);

/// m x kN column pool: column j*k + i is the augmented input u_{i+j}.
Eigen::MatrixXd input_column_pool(const Eigen::MatrixXd& raw_inputs, Index k, Index N);

HankelBundle build_hankel_bundle(const SignalLog& log, int d, Index k, Index N);

/// Tensor network of the repeated Khatri-Rao product Utilde (.) ... (.) Utilde
/// (d factors), built by successive SVDs. The first d-1 cores come out
/// left-orthonormal; the last core is (r_d, m, kN, 1). `rank_tol`, when
/// given, replaces the default numerical-rank tolerance at every step.
Mpo rkh2tn(const Eigen::MatrixXd& Utilde, int d, std::optional<double> rank_tol = std::nullopt);

/// Reshapes the last core (r_d, m, kN, 1) into (r_d, mk, N, 1), turning the
/// Khatri-Rao network into the km^d x N input block Hankel matrix.
Mpo fold_to_block_hankel(const Mpo& tn, Index k, Index N);

/// Explicit km^d x N input block Hankel matrix. Guarded.
Eigen::MatrixXd dense_input_hankel(const HankelBundle& bundle, std::uint64_t guard = dense_guard());

}  // namespace psstn
