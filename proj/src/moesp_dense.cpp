#include "psstn/moesp_dense.hpp"

#include <limits>

#include "psstn/mpo_ops.hpp"
#include "psstn/numerics.hpp"

namespace psstn {

Identification moesp_identify_dense(const SignalLog& log, int d, const OrderSpec& order, std::uint64_t guard) {
  const Index m = log.input_dim();
  const Index p = log.output_dim();
  const HankelSizes sizes = run_stage("hankel", [&] { return compute_k(log.samples(), m, p, d); });
  const Index k = sizes.k, N = sizes.N, r = sizes.r;
  const HankelBundle bundle = run_stage("hankel", [&] { return build_hankel_bundle(log, d, k, N); });
  Index md = 1;
  for (int i = 0; i < d; ++i) md *= m;

  // U = L11 Q1^T through a pivoted QR of U^T: U^T P = Q R, so U = P R^T Q^T.
  Eigen::MatrixXd Q, L21, L22, R1;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd>::PermutationType perm;
  Index observed = 0;
  run_stage("lq", [&] {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dense_input_hankel(bundle, guard).transpose());
    if (r > N) throw InsufficientData("persistence rank exceeds the number of columns");
    observed = qr.rank();
    Q = qr.householderQ();
    R1 = qr.matrixR().topRows(r).triangularView<Eigen::Upper>();
    perm = qr.colsPermutation();
    const double tol = static_cast<double>(std::max(k * md, N)) * std::numeric_limits<double>::epsilon() *
                       std::abs(R1(0, 0));
    if (!(std::abs(R1(r - 1, r - 1)) > tol))
      throw NotPersistentlyExciting("inputs are not persistently exciting: pivoted R(r,r) is numerically zero");
  });
  L21 = bundle.Y * Q.leftCols(r);
  L22 = bundle.Y * Q.rightCols(N - r);
  Q.resize(0, 0);

  const ObservabilityEstimate obs = run_stage("estimate_AC", [&] { return estimate_AC(L22, k, p, order); });

  // M = U2^T L21 L11^+ with L11 = P R1^T. R1^T = Ql Rl gives
  // L11^+ = Rl^{-1} Ql^T P^T.
  Eigen::MatrixXd bd;
  run_stage("solve_BD", [&] {
    Eigen::HouseholderQR<Eigen::MatrixXd> lq(R1.transpose());
    R1.resize(0, 0);
    const Eigen::MatrixXd X = obs.U2.transpose() * L21;  // q x r
    const Eigen::MatrixXd Y = lq.matrixQR().topLeftCorner(r, r).triangularView<Eigen::Upper>().transpose().solve(
        X.transpose());  // r x q, = Rl^{-T} X^T
    Eigen::MatrixXd Mt = Eigen::MatrixXd::Zero(k * md, Y.cols());
    Mt.topRows(r) = Y;
    Mt.applyOnTheLeft(lq.householderQ());
    Mt = perm * Mt;  // km^d x q, = M^T
    const Index q = obs.U2.cols();
    Eigen::MatrixXd stacked(k * q, md);
    for (Index i = 0; i < k; ++i) stacked.middleRows(i * q, q) = Mt.middleRows(i * md, md).transpose();

    const Eigen::MatrixXd sys = bd_system_matrix(obs.U2, obs.Ok, k, p);
    const SvdResult s = svd_econ(sys);
    if (numerical_rank(s.s, sys.rows(), sys.cols()) < sys.cols())
      throw IdentifiabilityError("B, D system matrix is rank deficient");
    bd = (s.V * s.s.cwiseInverse().asDiagonal()) * (s.U.transpose() * stacked);
    bd.col(0).setZero();
  });

  Dims rows(static_cast<std::size_t>(d), 1), cols(static_cast<std::size_t>(d), m);
  rows.back() = p + obs.n;
  Mpo bd_tn = zero_first_column(mpo_from_dense(bd, rows, cols, 1e-14));

  Identification out;
  out.model = PolynomialStateSpace(obs.A, obs.C, std::move(bd_tn));
  IdentificationReport& rep = out.report;
  rep.k = k;
  rep.N = N;
  rep.r = r;
  rep.observed_rank = observed;
  rep.n = obs.n;
  const auto mr = out.model.bd().ranks();
  rep.model_ranks.assign(mr.begin(), mr.end());
  rep.hankel_singular_values = obs.singular_values;
  if (observed != r)
    rep.warnings.push_back("pivoted QR rank of the input block Hankel matrix is " + std::to_string(observed) +
                           ", persistence rank is " + std::to_string(r));
  return out;
}

}  // namespace psstn
