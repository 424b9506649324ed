#include <doctest.h>

#include <complex>

#include "oracles.hpp"
#include "psstn/errors.hpp"
#include "psstn/mpo_ops.hpp"
#include "psstn/numerics.hpp"
#include "psstn/synth.hpp"
#include "psstn/tnmoesp.hpp"

using namespace psstn;
using oracle::Mat;
using oracle::Vec;

namespace {

ExperimentConfig small_config(Index n, Index m, Index p, int d, Index L, std::uint64_t seed) {
  ExperimentConfig c;
  c.n = n;
  c.m = m;
  c.p = p;
  c.d = d;
  c.samples = L;
  c.validation_samples = 300;
  c.seed = seed;
  return c;
}

Mat observability(const Mat& A, const Mat& C, Index k) {
  Mat O(k * C.rows(), A.cols());
  Mat block = C;
  for (Index i = 0; i < k; ++i) {
    O.middleRows(i * C.rows(), C.rows()) = block;
    block = block * A;
  }
  return O;
}

/// Largest distance from a true eigenvalue to its nearest estimate, with
/// equal counts required.
double eigenvalue_mismatch(const Mat& truth, const Mat& estimate) {
  if (truth.rows() != estimate.rows()) return 1e300;
  const Eigen::VectorXcd a = Eigen::EigenSolver<Mat>(truth, false).eigenvalues();
  Eigen::VectorXcd b = Eigen::EigenSolver<Mat>(estimate, false).eigenvalues();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    Index best = -1;
    for (Index j = 0; j < b.size(); ++j)
      if (!used[j] && (best < 0 || std::abs(a(i) - b(j)) < std::abs(a(i) - b(best)))) best = j;
    used[best] = true;
    worst = std::max(worst, std::abs(a(i) - b(best)));
  }
  return worst;
}

/// Block row i: [L_i, sum_{j>i} L_j O_k(block j-i-1)], last row [L_k, 0].
Mat system_matrix_oracle(const Mat& U2, const Mat& Ok, Index k, Index p) {
  const Index n = Ok.cols(), q = U2.cols();
  const Mat U2t = U2.transpose();
  Mat sys = Mat::Zero(k * q, p + n);
  for (Index i = 0; i < k; ++i) {
    sys.block(i * q, 0, q, p) = U2t.middleCols(i * p, p);
    for (Index j = i + 1; j < k; ++j)
      sys.block(i * q, p, q, n) += U2t.middleCols(j * p, p) * Ok.middleRows((j - i - 1) * p, p);
  }
  return sys;
}

struct SmallFactorization {
  InputFactorization f;
  Mat raw;
};

SmallFactorization small_factorization() {
  // m=2, d=2, p=1, L=16: k=4, N=13, r=9.
  SmallFactorization s;
  s.raw = oracle::random_matrix(16, 1, 3);
  s.f = factor_inputs(s.raw, 1, 2);
  return s;
}

}  // namespace

TEST_CASE("order selection") {
  Vec s(6);
  s << 10, 8, 5, 1e-9, 1e-12, 0;
  CHECK(select_order(s, 3, 2, OrderSpec::fixed(2)) == 2);
  CHECK(select_order(s, 3, 2, OrderSpec::threshold()) == 3);
  CHECK(select_order(s, 3, 2, OrderSpec::threshold(0.3)) == 3);
  CHECK(select_order(s, 3, 2, OrderSpec::threshold(0.6)) == 2);
  CHECK(select_order(s, 3, 2, OrderSpec::gap()) == 3);
  CHECK(select_order(Vec::Zero(6), 3, 2, OrderSpec::threshold()) == 0);
  CHECK_THROWS_AS(select_order(s, 3, 2, OrderSpec::fixed(5)), InputError);
  CHECK_THROWS_AS(select_order(s, 3, 2, OrderSpec::fixed(-1)), InputError);
}

TEST_CASE("estimate_AC recovers the observability structure") {
  const Index n = 2, p = 1, k = 5;
  Mat A(2, 2);
  A << 0.5, 0.3, -0.2, 0.7;
  const Mat C = oracle::random_matrix(p, n, 1);
  const Mat Otrue = observability(A, C, k);
  const Mat L22 = Otrue * oracle::random_matrix(n, 40, 2);
  const ObservabilityEstimate est = estimate_AC(L22, k, p, OrderSpec::threshold());
  CHECK(est.n == n);
  CHECK(eigenvalue_mismatch(A, est.A) <= 1e-8);
  CHECK(est.C == Mat(est.Ok.topRows(p)));
  CHECK((est.Ok.topRows((k - 1) * p) * est.A - est.Ok.bottomRows((k - 1) * p)).norm() <= 1e-8);
  CHECK(oracle::max_principal_angle(est.Ok, Otrue) <= 1e-8);
  CHECK(est.U2.cols() == k * p - n);
  CHECK((est.U2.transpose() * est.Ok).norm() <= 1e-10);

  const ObservabilityEstimate zero = estimate_AC(Mat::Zero(k * p, 40), k, p, OrderSpec::threshold());
  CHECK(zero.n == 0);
  CHECK(zero.A.size() == 0);
  CHECK(zero.C.size() == 0);

  CHECK_THROWS_AS(estimate_AC(L22, k, p, OrderSpec::fixed(k * p - p + 1)), InputError);
  CHECK_THROWS_AS(estimate_AC(L22, k + 1, p, OrderSpec::threshold()), DimensionMismatch);
}

TEST_CASE("B, D system matrix follows the block layout") {
  const Index k = 4, p = 2, n = 3;
  const Mat U2 = oracle::random_matrix(k * p, k * p - n, 4);
  const Mat Ok = oracle::random_matrix(k * p, n, 5);
  const Mat sys = bd_system_matrix(U2, Ok, k, p);
  CHECK(sys.rows() == k * (k * p - n));
  CHECK(sys.cols() == p + n);
  CHECK((sys - system_matrix_oracle(U2, Ok, k, p)).norm() <= 1e-14 * sys.norm());
  CHECK(sys.bottomRightCorner(k * p - n, n).isZero(0.0));
  CHECK_THROWS_AS(bd_system_matrix(U2, Ok, k + 1, p), DimensionMismatch);
}

TEST_CASE("M network equals the dense chain split into blocks") {
  const SmallFactorization s = small_factorization();
  const SvdBundle& svd = s.f.svd;
  const Index k = s.f.sizes.k, r = s.f.sizes.r, p = 1, n = 2;
  const Index q = k * p - n, md = 4;
  const Mat U2 = oracle::random_matrix(k * p, q, 6);
  const Mat L21 = oracle::random_matrix(k * p, r, 7);
  const Mpo M = build_M_network(svd, U2, L21, k);
  CHECK(M.ranks() == svd.W.ranks());

  const Mat Y = oracle::random_matrix(k * p, s.f.sizes.N, 8);
  const Mat chain = U2.transpose() * L21 * to_dense(make_l_factors(svd, Y).L11_inverse);  // q x k m^d
  const Mat dense = to_dense(M);
  REQUIRE(dense.rows() == q * k);
  REQUIRE(dense.cols() == md);
  for (Index i = 0; i < k; ++i)
    CHECK((dense.middleRows(i * q, q) - chain.middleCols(i * md, md)).norm() <= 1e-10 * chain.norm());

  CHECK(to_dense(build_M_network(svd, Mat::Zero(k * p, q), L21, k)).isZero(0.0));
  CHECK_THROWS_AS(build_M_network(svd, U2, oracle::random_matrix(k * p, r + 1, 1), k), DimensionMismatch);
}

TEST_CASE("solve_BD_network applies the pseudoinverse of the system matrix") {
  const SmallFactorization s = small_factorization();
  const Index k = s.f.sizes.k, p = 1, n = 2, q = k * p - n;
  const Mat U2 = Eigen::HouseholderQR<Mat>(oracle::random_matrix(k * p, k * p, 9)).householderQ() *
                 Mat::Identity(k * p, q);
  const Mat Ok = oracle::random_matrix(k * p, n, 10);
  const Mpo M = build_M_network(s.f.svd, U2, oracle::random_matrix(k * p, s.f.sizes.r, 11), k);
  const Mpo bd = solve_BD_network(M, Ok, U2, k, p);
  CHECK(bd.rows() == p + n);
  const Mat sys = system_matrix_oracle(U2, Ok, k, p);
  REQUIRE(oracle::dense_rank(sys) == p + n);
  const Mat expect = sys.completeOrthogonalDecomposition().pseudoInverse() * to_dense(M);
  CHECK((to_dense(bd) - expect).norm() <= 1e-10 * expect.norm());

  CHECK_THROWS_AS(solve_BD_network(M, Mat::Zero(k * p, n), Mat::Zero(k * p, q), k, p), IdentifiabilityError);
}

TEST_CASE("affine projector") {
  Vec diag(4);
  diag << 0, 1, 1, 1;
  CHECK(to_dense(affine_projector_tn(2, 2)) == Mat(diag.asDiagonal()));
  for (auto [m, d] : {std::pair<Index, int>{3, 1}, {3, 3}, {2, 5}}) {
    CAPTURE(m);
    CAPTURE(d);
    const Mpo P = affine_projector_tn(m, d);
    const Mat dense = to_dense(P);
    Mat expect = Mat::Identity(dense.rows(), dense.cols());
    expect(0, 0) = 0;
    CHECK(dense == expect);
    CHECK(dense * dense == dense);
    for (std::size_t i = 1; i + 1 < P.ranks().size(); ++i) CHECK(P.ranks()[i] == 2);
    Vec x = oracle::random_matrix(dense.rows(), 1, 12);
    x(0) = 0;
    CHECK(dense * x == x);
  }
}

TEST_CASE("affine projection of a stacked input map") {
  const Mpo P = affine_projector_tn(3, 3);
  const Mpo bd = oracle::random_mpo({1, 1, 5}, {3, 3, 3}, {1, 3, 4, 1}, 13);
  const Mat ref = to_dense(bd) * to_dense(P);

  const Mpo raw = apply_affine_projection(bd, P, false);
  const Mpo packed = apply_affine_projection(bd, P, true);
  for (const Mpo* out : {&raw, &packed}) {
    const Mat dense = to_dense(*out);
    CHECK((dense - ref).norm() <= 1e-12 * ref.norm());
    CHECK(dense.col(0).isZero(0.0));
    const auto ri = bd.ranks(), ro = out->ranks();
    for (std::size_t i = 0; i < ri.size(); ++i) CHECK(ro[i] <= 2 * ri[i]);
  }

  const Mpo clean = zero_first_column(bd);
  const Mat before = to_dense(clean);
  CHECK(before.col(0).isZero(0.0));
  CHECK((to_dense(apply_affine_projection(clean, P)) - before).norm() <= 1e-14 * before.norm() * 10);
  CHECK_THROWS_AS(apply_affine_projection(bd, affine_projector_tn(2, 3)), DimensionMismatch);
}

TEST_CASE("noiseless identification over a grid of small systems") {
  struct Case {
    Index n, m, p;
    int d;
    Index L;
  };
  for (const Case c : {Case{3, 3, 2, 2, 300}, Case{4, 3, 2, 3, 400}, Case{2, 2, 1, 3, 200}, Case{5, 4, 3, 3, 1000},
                       Case{3, 5, 2, 2, 600}, Case{5, 3, 3, 4, 700}}) {
    CAPTURE(c.n);
    CAPTURE(c.m);
    CAPTURE(c.p);
    CAPTURE(c.d);
    const Experiment e = make_experiment(small_config(c.n, c.m, c.p, c.d, c.L, 40 + c.d));
    const Identification id = tnmoesp_identify(e.ident, c.d);
    CHECK(id.report.n == c.n);
    CHECK(validation_error(e, id.model) <= 1e-10);
    CHECK(to_dense(id.model.bd()).col(0).isZero(0.0));
    CHECK(within_rank_bounds(id.model.bd()));
    CHECK(id.report.observed_rank == id.report.r);
    CHECK(id.report.rank_gap >= 1e6);
    CHECK(id.report.warnings.empty());
    const auto bounds = tn_rank_bounds(c.m, c.d);
    CHECK(id.report.input_ranks == bounds);
    CHECK(eigenvalue_mismatch(e.truth.A(), id.model.A()) <= 1e-8);
    const Index k = id.report.k;
    CHECK(oracle::max_principal_angle(observability(id.model.A(), id.model.C(), k),
                                      observability(e.truth.A(), e.truth.C(), k)) <= 1e-8);
  }
}

TEST_CASE("zero outputs identify a model that simulates zero") {
  const Mat u = oracle::random_matrix(300, 2, 14);
  const SignalLog log(u, Mat::Zero(300, 2));
  const Identification id = tnmoesp_identify(log, 2);
  CHECK(id.model.n() == 0);
  CHECK(to_dense(id.model.bd()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(id.model.bd().rows() == 2);
}

TEST_CASE("factorization reuse gives the same model as the one-shot pipeline") {
  const Experiment e = make_experiment(small_config(3, 3, 2, 2, 300, 15));
  const InputFactorization f = factor_inputs(e.ident.inputs(), 2, 2);
  const Identification a = identify_outputs(f, e.ident.outputs());
  const Identification b = tnmoesp_identify(e.ident, 2);
  CHECK(a.model.A() == b.model.A());
  CHECK(to_dense(a.model.bd()) == to_dense(b.model.bd()));
  CHECK_THROWS_AS(identify_outputs(f, e.ident.outputs().leftCols(1)), DimensionMismatch);
}

TEST_CASE("errors carry the stage that raised them") {
  const SignalLog tiny(oracle::random_matrix(10, 4, 16), oracle::random_matrix(10, 3, 17));
  CHECK_THROWS_WITH_AS(tnmoesp_identify(tiny, 3), doctest::Contains("[hankel]"), InsufficientData);

  const Experiment e = make_experiment(small_config(3, 3, 2, 2, 300, 18));
  TnOptions opt;
  opt.order = OrderSpec::fixed(1000);
  CHECK_THROWS_WITH_AS(tnmoesp_identify(e.ident, 2, opt), doctest::Contains("[estimate_AC]"), InputError);

  const SignalLog flat(Mat::Constant(300, 2, 0.3), e.ident.outputs());
  CHECK_THROWS_WITH_AS(tnmoesp_identify(flat, 2), doctest::Contains("[rkh2tn]"), NotPersistentlyExciting);
}

TEST_CASE("the unrecompressed path represents the same model") {
  const Experiment e = make_experiment(small_config(3, 3, 2, 3, 400, 19));
  TnOptions opt;
  opt.recompress = false;
  const Identification raw = tnmoesp_identify(e.ident, 3, opt);
  const Identification packed = tnmoesp_identify(e.ident, 3);
  CHECK(validation_error(e, raw.model) <= 1e-10);
  const auto rr = raw.model.bd().ranks(), rp = packed.model.bd().ranks();
  for (std::size_t i = 0; i < rr.size(); ++i) CHECK(rp[i] <= rr[i]);
}
