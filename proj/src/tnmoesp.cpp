#include "psstn/tnmoesp.hpp"

#include <cmath>
#include <limits>

#include "psstn/mpo_ops.hpp"
#include "psstn/numerics.hpp"

namespace psstn {

Index select_order(const Eigen::VectorXd& s, Index k, Index p, const OrderSpec& spec) {
  const Index limit = k * p - p;
  Index n = 0;
  switch (spec.kind) {
    case OrderSpec::Kind::kFixed:
      n = spec.n;
      if (n < 0) throw InputError("system order must be nonnegative");
      break;
    case OrderSpec::Kind::kThreshold: {
      const double smax = s.size() ? s(0) : 0.0;
      n = smax > 0.0 ? numerical_rank(s, spec.tol * smax) : 0;
      break;
    }
    case OrderSpec::Kind::kGap: {
      const Index n_max = spec.n_max > 0 ? std::min(spec.n_max, limit) : limit;
      const Index window = std::min<Index>(s.size(), 2 * n_max);
      double best = -1.0;
      for (Index i = 0; i + 1 < window && i < n_max; ++i) {
        if (!(s(i) > 0.0)) break;
        const double ratio = s(i + 1) > 0.0 ? s(i) / s(i + 1) : std::numeric_limits<double>::infinity();
        if (ratio > best) {
          best = ratio;
          n = i + 1;
        }
      }
      break;
    }
  }
  if (n > limit)
    throw InputError("system order " + std::to_string(n) + " exceeds kp - p = " + std::to_string(limit) +
                     "; more block rows are needed");
  return n;
}

ObservabilityEstimate estimate_AC(const Eigen::MatrixXd& L22, Index k, Index p, const OrderSpec& spec) {
  const Index kp = k * p;
  if (L22.rows() != kp)
    throw DimensionMismatch("L22 has " + std::to_string(L22.rows()) + " rows, expected kp = " + std::to_string(kp));
  if (L22.cols() < kp)
    throw InsufficientData("L22 has fewer columns (" + std::to_string(L22.cols()) + ") than rows (" +
                           std::to_string(kp) + ")");
  const SvdResult svd = svd_econ(L22);

  ObservabilityEstimate out;
  out.singular_values = svd.s;
  out.n = select_order(svd.s, k, p, spec);
  const Index n = out.n;
  out.Ok = svd.U.leftCols(n) * svd.s.head(n).cwiseSqrt().asDiagonal();
  out.U2 = svd.U.rightCols(kp - n);
  out.C = out.Ok.topRows(p);
  out.A = pinv(out.Ok.topRows(kp - p)) * out.Ok.bottomRows(kp - p);
  return out;
}

Eigen::MatrixXd bd_system_matrix(const Eigen::MatrixXd& U2, const Eigen::MatrixXd& Ok, Index k, Index p) {
  const Index kp = k * p;
  const Index n = Ok.cols();
  if (U2.rows() != kp || Ok.rows() != kp || U2.cols() != kp - n)
    throw DimensionMismatch("bd_system_matrix: U2 is " + std::to_string(U2.rows()) + "x" +
                            std::to_string(U2.cols()) + ", O_k is " + std::to_string(Ok.rows()) + "x" +
                            std::to_string(n) + ", kp = " + std::to_string(kp));
  const Index q = kp - n;
  const Eigen::MatrixXd U2t = U2.transpose();
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(k * q, p + n);
  for (Index i = 0; i < k; ++i) {
    sys.block(i * q, 0, q, p) = U2t.middleCols(i * p, p);
    const Index rest = k - 1 - i;
    if (rest > 0 && n > 0)
      sys.block(i * q, p, q, n).noalias() = U2t.middleCols((i + 1) * p, rest * p) * Ok.topRows(rest * p);
  }
  return sys;
}

Mpo build_M_network(const SvdBundle& svd, const Eigen::MatrixXd& U2, const Eigen::MatrixXd& L21, Index k) {
  const Index r = svd.r;
  const Index N = svd.Q.rows();
  if (L21.cols() != r || U2.rows() != L21.rows())
    throw DimensionMismatch("build_M_network: U2 is " + std::to_string(U2.rows()) + "x" +
                            std::to_string(U2.cols()) + ", L21 is " + std::to_string(L21.rows()) + "x" +
                            std::to_string(L21.cols()) + ", r = " + std::to_string(r));
  const Index q = U2.cols();

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(q, N);
  x.leftCols(r).noalias() = (U2.transpose() * L21) * svd.T.head(r).cwiseInverse().asDiagonal();

  std::vector<Tensor> cores;
  const std::size_t d = svd.W.num_cores();
  for (std::size_t i = 0; i + 1 < d; ++i) cores.push_back(svd.W.core(i).permuted({0, 2, 1, 3}));

  const Tensor& w = svd.W.core(d - 1);  // (r_d, mk, N, 1)
  const Index rd = w.dim(0);
  const Index mk = w.dim(1);
  if (mk % k != 0) throw DimensionMismatch("build_M_network: last core row dim is not a multiple of k");
  const Index m = mk / k;
  Tensor last = mode_product(w, x, 2)          // (r_d, mk, q, 1)
                    .permuted({0, 2, 1, 3})    // (r_d, q, mk, 1)
                    .reshaped(Dims{rd, q, m, k})
                    .permuted({0, 1, 3, 2})    // (r_d, q, k, m)
                    .reshaped(Dims{rd, q * k, m, 1});
  cores.push_back(std::move(last));
  return Mpo(std::move(cores));
}

Mpo solve_BD_network(const Mpo& M, const Eigen::MatrixXd& Ok, const Eigen::MatrixXd& U2, Index k, Index p) {
  const Eigen::MatrixXd sys = bd_system_matrix(U2, Ok, k, p);
  const Tensor& last = M.core(M.num_cores() - 1);
  if (last.dim(1) != sys.rows())
    throw DimensionMismatch("solve_BD_network: M network has " + std::to_string(last.dim(1)) +
                            " stacked rows, system matrix has " + std::to_string(sys.rows()));
  const SvdResult s = svd_econ(sys);
  const Index rank = numerical_rank(s.s, sys.rows(), sys.cols());
  if (rank < sys.cols())
    throw IdentifiabilityError("B, D system matrix has rank " + std::to_string(rank) + " < p + n = " +
                               std::to_string(sys.cols()));
  const Eigen::MatrixXd inv = s.V * s.s.cwiseInverse().asDiagonal() * s.U.transpose();
  return M.with_core(M.num_cores() - 1, mode_product(last, inv, 1));
}

Mpo affine_projector_tn(Index m, int d) {
  if (m < 1 || d < 1) throw InputError("affine_projector_tn: m and d must be positive");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(m, m);
  E(0, 0) = 1.0;
  auto put = [m](Tensor& core, Index a, Index b, const Eigen::MatrixXd& block) {
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < m; ++i) core(a, i, j, b) = block(i, j);
  };

  std::vector<Tensor> cores;
  if (d == 1) {
    Tensor only(Dims{1, m, m, 1});
    put(only, 0, 0, I - E);
    cores.push_back(std::move(only));
    return Mpo(std::move(cores));
  }
  Tensor first(Dims{1, m, m, 2});
  put(first, 0, 0, I);
  put(first, 0, 1, E);
  cores.push_back(std::move(first));
  for (int k = 1; k + 1 < d; ++k) {
    Tensor mid(Dims{2, m, m, 2});
    put(mid, 0, 0, I);
    put(mid, 1, 1, E);
    cores.push_back(std::move(mid));
  }
  Tensor last(Dims{2, m, m, 1});
  put(last, 0, 0, I);
  put(last, 1, 0, -E);
  cores.push_back(std::move(last));
  return Mpo(std::move(cores));
}

Mpo apply_affine_projection(const Mpo& bd, const Mpo& P, bool recompress_result) {
  Mpo out = multiply(bd, P);
  if (recompress_result) out = recompress(out, 1e-12);
  return zero_first_column(out);
}

InputFactorization factor_inputs(const Eigen::MatrixXd& raw_inputs, Index p, int d, std::optional<double> rank_tol) {
  if (!raw_inputs.allFinite()) throw NonFiniteInput("inputs contain non-finite samples");
  InputFactorization f;
  f.d = d;
  f.m = raw_inputs.cols() + 1;
  f.p = p;
  f.sizes = run_stage("hankel", [&] { return compute_k(raw_inputs.rows(), f.m, p, d); });
  const Index k = f.sizes.k, N = f.sizes.N;
  Mpo u = run_stage("rkh2tn", [&] { return rkh2tn(input_column_pool(raw_inputs, k, N), d, rank_tol); });
  const auto ranks = u.ranks();
  f.input_ranks.assign(ranks.begin(), ranks.end() - 1);
  run_stage("rkh2tn", [&] {
    const auto bounds = tn_rank_bounds(f.m, d);
    for (int i = 0; i < d; ++i)
      if (f.input_ranks[i] < bounds[i])
        throw NotPersistentlyExciting("inputs are not persistently exciting: network rank r_" + std::to_string(i + 1) +
                                      " = " + std::to_string(f.input_ranks[i]) + " is below its bound " +
                                      std::to_string(bounds[i]));
  });
  f.svd = run_stage("tn_svd", [&] {
    return tn_econ_svd(fold_to_block_hankel(u, k, N), f.sizes.r, Orthogonalize::kSkip);
  });
  return f;
}

Identification identify_outputs(const InputFactorization& f, const Eigen::MatrixXd& outputs, const TnOptions& options) {
  const Index k = f.sizes.k, N = f.sizes.N;
  if (outputs.cols() != f.p || outputs.rows() != N + k - 1)
    throw DimensionMismatch("outputs are " + std::to_string(outputs.rows()) + "x" + std::to_string(outputs.cols()) +
                            ", expected " + std::to_string(N + k - 1) + "x" + std::to_string(f.p));
  if (!outputs.allFinite()) throw NonFiniteInput("outputs contain non-finite samples");

  const Eigen::MatrixXd Y = output_block_hankel(outputs, k, N);
  const LFactors lf = run_stage("l_factors", [&] { return make_l_factors(f.svd, Y, false); });
  const ObservabilityEstimate obs =
      run_stage("estimate_AC", [&] { return estimate_AC(lf.L22, k, f.p, options.order); });
  const Mpo M = run_stage("M_network", [&] { return build_M_network(f.svd, obs.U2, lf.L21, k); });
  Mpo bd = run_stage("solve_BD", [&] { return solve_BD_network(M, obs.Ok, obs.U2, k, f.p); });
  bd = run_stage("affine_projection", [&] {
    return apply_affine_projection(bd, affine_projector_tn(f.m, f.d), options.recompress);
  });

  Identification out;
  out.model = PolynomialStateSpace(obs.A, obs.C, std::move(bd));
  IdentificationReport& rep = out.report;
  rep.k = k;
  rep.N = N;
  rep.r = f.sizes.r;
  rep.observed_rank = f.svd.observed_rank;
  rep.rank_gap = f.svd.rank_gap();
  rep.n = obs.n;
  rep.input_ranks = f.input_ranks;
  const auto mr = out.model.bd().ranks();
  rep.model_ranks.assign(mr.begin(), mr.end());
  rep.input_singular_values = f.svd.T;
  rep.hankel_singular_values = obs.singular_values;
  if (rep.observed_rank != rep.r)
    rep.warnings.push_back("numerical rank of the input block Hankel matrix is " +
                           std::to_string(rep.observed_rank) + ", persistence rank is " + std::to_string(rep.r));
  return out;
}

Identification tnmoesp_identify(const SignalLog& log, int d, const TnOptions& options) {
  const InputFactorization f = factor_inputs(log.inputs(), log.output_dim(), d, options.rank_tol);
  return identify_outputs(f, log.outputs(), options);
}

}  // namespace psstn
