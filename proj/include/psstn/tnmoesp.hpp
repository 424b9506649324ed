#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "psstn/hankel.hpp"
#include "psstn/model.hpp"
#include "psstn/tn_svd.hpp"

namespace psstn {

/// How the system order n is chosen from the singular values of L22.
struct OrderSpec {
  enum class Kind {
    kFixed,      ///< use `n` as given
    kThreshold,  ///< count singular values above tol * s_max
    kGap,        ///< position of the largest ratio s_i / s_{i+1}
  };
  Kind kind = Kind::kThreshold;
  Index n = 0;
  double tol = 1e-8;
  Index n_max = 0;  ///< kGap only; 0 means kp - p

  static OrderSpec fixed(Index n) { return {Kind::kFixed, n, 0.0, 0}; }
  static OrderSpec threshold(double tol = 1e-8) { return {Kind::kThreshold, 0, tol, 0}; }
  static OrderSpec gap(Index n_max = 0) { return {Kind::kGap, 0, 0.0, n_max}; }
};

/// Order from the spectrum `s` of L22 (kp values). Throws InputError when the
/// result would exceed kp - p.
Index select_order(const Eigen::VectorXd& s, Index k, Index p, const OrderSpec& spec);

struct ObservabilityEstimate {
  Index n = 0;
  Eigen::MatrixXd A;   ///< n x n
  Eigen::MatrixXd C;   ///< p x n
  Eigen::MatrixXd Ok;  ///< kp x n, U1 S1^{1/2}
  Eigen::MatrixXd U2;  ///< kp x (kp - n)
  Eigen::VectorXd singular_values;  ///< of L22
};

/// SVD of L22, order selection, O_k = U1 S1^{1/2}, C = O_k(1:p, :) and A
/// from the shift equation.
ObservabilityEstimate estimate_AC(const Eigen::MatrixXd& L22, Index k, Index p, const OrderSpec& spec);

/// The k(kp-n) x (p+n) left-hand matrix of the B, D system. Block row i
/// (1-based) is [L_i, (L_{i+1} ... L_k) O_{k-i}], the last one [L_k, 0],
/// with U2^T = (L_1 ... L_k) and O_j the top jp rows of O_k.
Eigen::MatrixXd bd_system_matrix(const Eigen::MatrixXd& U2, const Eigen::MatrixXd& Ok, Index k, Index p);

/// Network of U2^T L21 L11^{-1}, already split into its k blocks of m^d
/// columns and stacked: last core (r_d, (kp-n)k, m, 1).
Mpo build_M_network(const SvdBundle& svd, const Eigen::MatrixXd& U2, const Eigen::MatrixXd& L21, Index k);

/// Applies the pseudoinverse of bd_system_matrix to the last core of the M
/// network, giving [D; B] as a (p+n) x m^d network. Throws
/// IdentifiabilityError when the system matrix lacks full column rank.
Mpo solve_BD_network(const Mpo& M, const Eigen::MatrixXd& Ok, const Eigen::MatrixXd& U2, Index k, Index p);

/// Rank-2 network of the m^d x m^d identity with entry (0, 0) zeroed.
Mpo affine_projector_tn(Index m, int d);

/// bd * P. With `recompress_result`, ranks are brought back to minimal at
/// relative tolerance 1e-12. The first column is then made exactly zero.
Mpo apply_affine_projection(const Mpo& bd, const Mpo& P, bool recompress_result = true);

struct TnOptions {
  OrderSpec order = OrderSpec::threshold();
  bool recompress = true;
  /// Replaces the default numerical-rank tolerance inside rkh2tn.
  std::optional<double> rank_tol;
};

struct IdentificationReport {
  Index k = 0;
  Index N = 0;
  Index r = 0;             ///< persistence rank used for the partition
  Index observed_rank = 0;  ///< numerical rank of the input block Hankel matrix
  double rank_gap = 0.0;
  Index n = 0;
  std::vector<Index> input_ranks;  ///< TN ranks of U_{0|k-1} (empty for the dense method)
  std::vector<Index> model_ranks;  ///< TN ranks of the identified [D; B]
  Eigen::VectorXd input_singular_values;
  Eigen::VectorXd hankel_singular_values;  ///< of L22
  std::vector<std::string> warnings;
};

struct Identification {
  PolynomialStateSpace model;
  IdentificationReport report;
};

/// Everything that depends only on the inputs: the structured SVD of the
/// input block Hankel network. Reusable for several output records measured
/// under the same input sequence.
struct InputFactorization {
  int d = 0;
  Index m = 0;
  Index p = 0;
  HankelSizes sizes;
  std::vector<Index> input_ranks;
  SvdBundle svd;
};

InputFactorization factor_inputs(const Eigen::MatrixXd& raw_inputs, Index p, int d,
                                 std::optional<double> rank_tol = std::nullopt);

Identification identify_outputs(const InputFactorization& factors, const Eigen::MatrixXd& outputs,
                                const TnOptions& options = {});

/// Full tensor network MOESP pipeline. Errors carry the name of the stage
/// that raised them.
Identification tnmoesp_identify(const SignalLog& log, int d, const TnOptions& options = {});

}  // namespace psstn
