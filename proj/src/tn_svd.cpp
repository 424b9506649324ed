#include "psstn/tn_svd.hpp"

#include <sstream>

#include "psstn/numerics.hpp"

namespace psstn {

double SvdBundle::rank_gap() const { return psstn::rank_gap(T, r); }

SvdBundle tn_econ_svd(const Mpo& u, Index r, Orthogonalize mode) {
  std::vector<Tensor> cores = u.cores();
  const std::size_t d = cores.size();
  const Tensor& last_in = cores.back();
  const Index rows = last_in.dim(0) * last_in.dim(1);
  const Index N = last_in.dim(2);
  if (last_in.dim(3) != 1) throw DimensionMismatch("tn_econ_svd: last core must have trailing rank 1");
  if (rows < N)
    throw DimensionMismatch("tn_econ_svd: r_d*m*k = " + std::to_string(rows) + " is smaller than N = " +
                            std::to_string(N));
  for (std::size_t i = 0; i + 1 < d; ++i)
    if (cores[i].dim(2) != 1) throw DimensionMismatch("tn_econ_svd: only the last core may carry columns");

  if (mode == Orthogonalize::kSweep) {
    for (std::size_t i = 0; i + 1 < d; ++i) {
      const Index r1 = cores[i].dim(3);
      const QrResult qr = qr_thin(Eigen::MatrixXd(cores[i].unfold(cores[i].size() / r1)));
      cores[i] = Tensor::from_matrix(qr.Q, cores[i].dims());
      cores[i + 1] = mode_product(cores[i + 1], qr.R, 0);
    }
  }

  const Tensor& last = cores.back();
  const SvdResult svd = svd_econ(Eigen::MatrixXd(last.unfold(last.dim(0) * last.dim(1))));
  cores.back() = Tensor::from_matrix(svd.U, Dims{last.dim(0), last.dim(1), N, 1});

  SvdBundle out;
  out.W = Mpo(std::move(cores));
  out.T = svd.s;
  out.Q = svd.V;
  out.r = r;
  out.observed_rank = numerical_rank(svd.s, rows, N);
  return out;
}

void require_invertible_t1(const SvdBundle& bundle) {
  const Index r = bundle.r;
  if (r < 1 || r > bundle.T.size())
    throw NotPersistentlyExciting("partition rank " + std::to_string(r) + " outside 1.." +
                                  std::to_string(bundle.T.size()));
  const double tol = default_rank_tolerance(bundle.T, bundle.W.rows(), bundle.T.size());
  if (bundle.T(r - 1) <= tol) {
    std::ostringstream os;
    os << "inputs are not persistently exciting: T(r)=" << bundle.T(r - 1) << " is numerically zero (r=" << r
       << ", observed rank " << bundle.observed_rank << ", rank gap T(r)/T(r+1)=" << bundle.rank_gap() << ")";
    throw NotPersistentlyExciting(os.str());
  }
}

LFactors make_l_factors(const SvdBundle& bundle, const Eigen::MatrixXd& Y, bool with_inverse) {
  const Index N = bundle.Q.rows();
  const Index r = bundle.r;
  if (Y.cols() != N)
    throw DimensionMismatch("make_l_factors: Y has " + std::to_string(Y.cols()) + " columns, expected " +
                            std::to_string(N));
  require_invertible_t1(bundle);

  LFactors out;
  out.L21 = Y * bundle.Q.leftCols(r);
  out.L22 = Y * bundle.Q.rightCols(N - r);
  if (with_inverse) {
    std::vector<Tensor> cores;
    for (const auto& c : bundle.W.cores()) cores.push_back(c.permuted({0, 2, 1, 3}));
    Eigen::MatrixXd scale = Eigen::MatrixXd::Zero(r, N);
    scale.leftCols(r).diagonal() = bundle.T.head(r).cwiseInverse();
    cores.back() = mode_product(cores.back(), scale, 1);
    out.L11_inverse = Mpo(std::move(cores));
  }
  return out;
}

}  // namespace psstn
