#include "psstn/hankel.hpp"

#include <string>

#include "psstn/numerics.hpp"

namespace psstn {

SignalLog::SignalLog(Eigen::MatrixXd inputs, Eigen::MatrixXd outputs)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  if (inputs_.rows() != outputs_.rows())
    throw DimensionMismatch("signal log: " + std::to_string(inputs_.rows()) + " input samples but " +
                            std::to_string(outputs_.rows()) + " output samples");
  if (!inputs_.allFinite() || !outputs_.allFinite())
    throw NonFiniteInput("signal log contains non-finite samples");
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < k; ++i) out = out * (n - i) / (i + 1);
  return out;
}

Index persistence_rank_bound(Index m, int d, Index k) {
  const auto c = static_cast<Index>(binomial(static_cast<std::uint64_t>(d + m - 1), static_cast<std::uint64_t>(m - 1)));
  return k * c - k + 1;
}

std::vector<Index> tn_rank_bounds(Index m, int d) {
  std::vector<Index> out;
  for (int i = 1; i <= d; ++i)
    out.push_back(static_cast<Index>(binomial(static_cast<std::uint64_t>(i - 1 + m - 1), static_cast<std::uint64_t>(m - 1))));
  return out;
}

HankelSizes compute_k(Index L, Index m, Index p, int d) {
  if (m < 1 || p < 1 || d < 1) throw InputError("compute_k: m, p and d must be positive");
  const auto c = static_cast<Index>(binomial(static_cast<std::uint64_t>(d + m - 1), static_cast<std::uint64_t>(m - 1)));
  const Index per_block = p + c;
  HankelSizes s;
  s.k = L / per_block;
  if (s.k < 2)
    throw InsufficientData("need at least " + std::to_string(2 * per_block) + " samples for m=" +
                           std::to_string(m) + ", p=" + std::to_string(p) + ", d=" + std::to_string(d) +
                           " (got " + std::to_string(L) + ")");
  s.N = L - s.k + 1;
  s.r = persistence_rank_bound(m, d, s.k);
  if (s.N < s.r + s.k * p)
    throw InsufficientData("N=" + std::to_string(s.N) + " is below r + kp = " + std::to_string(s.r + s.k * p));
  return s;
}

Eigen::MatrixXd augment_inputs(const Eigen::MatrixXd& raw_inputs) {
  Eigen::MatrixXd out(raw_inputs.cols() + 1, raw_inputs.rows());
  out.row(0).setOnes();
  out.bottomRows(raw_inputs.cols()) = raw_inputs.transpose();
  return out;
}

namespace {

void check_window(Index samples, Index k, Index N) {
  if (k < 1 || N < 1) throw InputError("block Hankel sizes k and N must be positive");
  if (samples != N + k - 1)
    throw DimensionMismatch("block Hankel: L=" + std::to_string(samples) + " but N + k - 1 = " +
                            std::to_string(N + k - 1));
}

}  // namespace

Eigen::MatrixXd output_block_hankel(const Eigen::MatrixXd& outputs, Index k, Index N) {
  check_window(outputs.rows(), k, N);
  const Index p = outputs.cols();
  Eigen::MatrixXd Y(k * p, N);
  for (Index j = 0; j < N; ++j)
    for (Index i = 0; i < k; ++i) Y.block(i * p, j, p, 1) = outputs.row(i + j).transpose();
  return Y;
}

Eigen::MatrixXd input_column_pool(const Eigen::MatrixXd& raw_inputs, Index k, Index N) {
  check_window(raw_inputs.rows(), k, N);
  const Eigen::MatrixXd u = augment_inputs(raw_inputs);
  Eigen::MatrixXd pool(u.rows(), k * N);
  for (Index j = 0; j < N; ++j) pool.middleCols(j * k, k) = u.middleCols(j, k);
  return pool;
}

HankelBundle build_hankel_bundle(const SignalLog& log, int d, Index k, Index N) {
  if (d < 1) throw InputError("build_hankel_bundle: degree must be positive");
  HankelBundle b;
  b.Y = output_block_hankel(log.outputs(), k, N);
  b.Utilde = input_column_pool(log.inputs(), k, N);
  b.k = k;
  b.N = N;
  b.d = d;
  b.r = persistence_rank_bound(log.input_dim(), d, k);
  return b;
}

Mpo rkh2tn(const Eigen::MatrixXd& Utilde, int d, std::optional<double> rank_tol) {
  if (d < 1) throw InputError("rkh2tn: degree must be at least 1");
  const Index m = Utilde.rows();
  const Index cols = Utilde.cols();
  const Eigen::RowVectorXd norms = Utilde.colwise().norm();

  std::vector<Tensor> cores;
  Tensor last = Tensor::from_matrix(Utilde, Dims{1, m, cols, 1});
  Index r = 1;
  for (int j = 1; j < d; ++j) {
    Eigen::Map<const Eigen::MatrixXd> t(last.data().data(), r * m, cols);
    // The Khatri-Rao product T (.) Utilde, viewed as (r m) x (m kN), has
    // Gram matrix sum_c t_c t_c^T |u_c|^2, so its left singular pairs are
    // those of T diag(|u_c|).
    const SvdResult svd = svd_econ(t * norms.asDiagonal());
    const double tol = rank_tol.value_or(default_rank_tolerance(svd.s, r * m, m * cols));
    const Index r1 = std::max<Index>(numerical_rank(svd.s, tol), 1);
    cores.push_back(Tensor::from_matrix(svd.U.leftCols(r1), Dims{r, m, 1, r1}));

    const Eigen::MatrixXd g = svd.U.leftCols(r1).transpose() * t;  // r1 x kN
    Tensor next(Dims{r1, m, cols, 1});
    double* out = next.data().data();
    for (Index c = 0; c < cols; ++c)
      for (Index i = 0; i < m; ++i)
        Eigen::Map<Eigen::VectorXd>(out + r1 * (i + m * c), r1) = Utilde(i, c) * g.col(c);
    last = std::move(next);
    r = r1;
  }
  cores.push_back(std::move(last));
  return Mpo(std::move(cores));
}

Mpo fold_to_block_hankel(const Mpo& tn, Index k, Index N) {
  const Tensor& last = tn.core(tn.num_cores() - 1);
  if (last.dim(2) != k * N || last.dim(3) != 1)
    throw DimensionMismatch("fold_to_block_hankel: last core " + detail::format_dims(last.dims()) +
                            " is not (r_d, m, kN, 1) with kN = " + std::to_string(k * N));
  return tn.with_core(tn.num_cores() - 1, last.reshaped(Dims{last.dim(0), last.dim(1) * k, N, 1}));
}

Eigen::MatrixXd dense_input_hankel(const HankelBundle& bundle, std::uint64_t guard) {
  const Index m = bundle.Utilde.rows();
  Index md = 1;
  for (int i = 0; i < bundle.d; ++i) md *= m;
  const auto entries = detail::saturating_product(static_cast<std::uint64_t>(bundle.k * md),
                                                  static_cast<std::uint64_t>(bundle.N));
  if (entries > guard)
    throw SizeGuardError("input block Hankel matrix of " + std::to_string(bundle.k * md) + "x" +
                         std::to_string(bundle.N) + " exceeds the dense guard of " + std::to_string(guard) +
                         " entries; use the tensor network method");
  Eigen::MatrixXd out(bundle.k * md, bundle.N);
  for (Index j = 0; j < bundle.N; ++j)
    for (Index i = 0; i < bundle.k; ++i)
      out.block(i * md, j, md, 1) = repeated_kron(bundle.Utilde.col(j * bundle.k + i), bundle.d);
  return out;
}

}  // namespace psstn
