#include "psstn/mpo_ops.hpp"

#include "psstn/numerics.hpp"

namespace psstn {
namespace {

Index truncation_rank(const Eigen::VectorXd& s, double rel_tol) {
  if (s.size() == 0) return 1;
  const Index r = numerical_rank(s, rel_tol * s(0));
  return std::max<Index>(r, 1);
}

}  // namespace

Mpo mpo_from_dense(const Eigen::MatrixXd& a, const Dims& row_dims, const Dims& col_dims, double rel_tol) {
  const std::size_t d = row_dims.size();
  if (d == 0 || col_dims.size() != d)
    throw DimensionMismatch("mpo_from_dense: row and column dim lists must be nonempty and equal in length");
  if (a.rows() != detail::product(row_dims) || a.cols() != detail::product(col_dims))
    throw DimensionMismatch("mpo_from_dense: matrix is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " but dims give " + detail::format_dims(row_dims) +
                            " x " + detail::format_dims(col_dims));
  Dims all = row_dims;
  all.insert(all.end(), col_dims.begin(), col_dims.end());
  std::vector<std::size_t> perm;
  for (std::size_t k = 0; k < d; ++k) {
    perm.push_back(k);
    perm.push_back(d + k);
  }
  // (n1, m1, n2, m2, ..., nd, md)
  Tensor x = Tensor::from_matrix(a, all).permuted(std::span<const std::size_t>(perm));

  std::vector<Tensor> cores;
  Eigen::MatrixXd rest = x.unfold(x.size());  // column vector; reshaped below
  Index r = 1;
  Index remaining = x.size();
  for (std::size_t k = 0; k + 1 < d; ++k) {
    const Index nm = row_dims[k] * col_dims[k];
    remaining /= nm;
    Eigen::Map<const Eigen::MatrixXd> unfolded(rest.data(), r * nm, remaining);
    const SvdResult svd = svd_econ(unfolded);
    const Index rk = truncation_rank(svd.s, rel_tol);
    cores.push_back(Tensor::from_matrix(svd.U.leftCols(rk), Dims{r, row_dims[k], col_dims[k], rk}));
    rest = svd.s.head(rk).asDiagonal() * svd.V.leftCols(rk).transpose();
    r = rk;
  }
  cores.push_back(Tensor::from_matrix(rest, Dims{r, row_dims[d - 1], col_dims[d - 1], 1}));
  return Mpo(std::move(cores));
}

Mpo recompress(const Mpo& tn, double rel_tol) {
  std::vector<Tensor> cores = tn.cores();
  const std::size_t d = cores.size();
  if (d == 1) return tn;

  // Right-to-left: make cores 2..d right-orthonormal.
  for (std::size_t k = d - 1; k >= 1; --k) {
    const Index r0 = cores[k].dim(0);
    const SvdResult svd = svd_econ(Eigen::MatrixXd(cores[k].unfold(r0)));
    const Index s = svd.s.size();
    Dims dims = cores[k].dims();
    dims[0] = s;
    cores[k] = Tensor::from_matrix(svd.V.transpose(), dims);
    const Eigen::MatrixXd us = svd.U * svd.s.asDiagonal();  // r0 x s
    cores[k - 1] = mode_product(cores[k - 1], us.transpose(), 3);
  }

  // Left-to-right truncation.
  for (std::size_t k = 0; k + 1 < d; ++k) {
    const Index r1 = cores[k].dim(3);
    const Index rows = cores[k].size() / r1;
    const SvdResult svd = svd_econ(Eigen::MatrixXd(cores[k].unfold(rows)));
    const Index rk = truncation_rank(svd.s, rel_tol);
    Dims dims = cores[k].dims();
    dims[3] = rk;
    cores[k] = Tensor::from_matrix(svd.U.leftCols(rk), dims);
    const Eigen::MatrixXd sv = svd.s.head(rk).asDiagonal() * svd.V.leftCols(rk).transpose();
    cores[k + 1] = mode_product(cores[k + 1], sv, 0);
  }
  return Mpo(std::move(cores));
}

Mpo zero_first_column(const Mpo& tn) {
  std::vector<Tensor> cores = tn.cores();
  const std::size_t d = cores.size();
  for (std::size_t k = 0; k + 1 < d; ++k)
    if (cores[k].dim(1) != 1) throw DimensionMismatch("zero_first_column: interior row dims must be 1");

  for (std::size_t k = 0; k + 1 < d; ++k) {
    Tensor& core = cores[k];
    const Index r1 = core.dim(3);
    Eigen::VectorXd v(r1);
    for (Index b = 0; b < r1; ++b) v(b) = core(0, 0, 0, b);
    Eigen::VectorXd essential(std::max<Index>(r1 - 1, 0));
    double tau = 0.0, beta = 0.0;
    v.makeHouseholder(essential, tau, beta);
    Eigen::VectorXd w(r1);
    w(0) = 1.0;
    w.tail(r1 - 1) = essential;
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(r1, r1) - tau * w * w.transpose();
    core = mode_product(core, h, 3);
    core(0, 0, 0, 0) = beta;
    for (Index b = 1; b < r1; ++b) core(0, 0, 0, b) = 0.0;
    cores[k + 1] = mode_product(cores[k + 1], h, 0);
  }
  Tensor& last = cores.back();
  for (Index j = 0; j < last.dim(1); ++j) last(0, j, 0, 0) = 0.0;
  return Mpo(std::move(cores));
}

}  // namespace psstn
