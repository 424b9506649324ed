#include <doctest.h>

#include <chrono>

#include "oracles.hpp"
#include "psstn/errors.hpp"
#include "psstn/model.hpp"
#include "psstn/mpo_ops.hpp"

using namespace psstn;
using oracle::Mat;
using oracle::Vec;

namespace {

Mat stable_matrix(Index n, double rho, std::uint64_t seed) {
  const Mat a = oracle::random_matrix(n, n, seed);
  const double radius = Eigen::EigenSolver<Mat>(a, false).eigenvalues().cwiseAbs().maxCoeff();
  return a * (rho / radius);
}

Mpo random_bd(Index m, Index p, Index n, int d, Index rank, std::uint64_t seed, bool zero_affine) {
  Dims rows(d, 1), cols(d, m);
  rows.back() = p + n;
  std::vector<Index> ranks(d + 1, rank);
  ranks.front() = ranks.back() = 1;
  const Mpo bd = oracle::random_mpo(rows, cols, ranks, seed);
  return zero_affine ? zero_first_column(bd) : bd;
}

PolynomialStateSpace random_model(Index n, Index m, Index p, int d, std::uint64_t seed, bool zero_affine = false) {
  return PolynomialStateSpace(stable_matrix(n, 0.9, seed), oracle::random_matrix(p, n, seed + 1),
                              random_bd(m, p, n, d, 3, seed + 2, zero_affine));
}

double rel(const Mat& a, const Mat& ref) { return (a - ref).norm() / ref.norm(); }

}  // namespace

TEST_CASE("model constructor validates the layout") {
  const Mpo bd = random_bd(3, 2, 4, 2, 2, 1, false);
  CHECK_NOTHROW(PolynomialStateSpace(Mat::Zero(4, 4), Mat::Zero(2, 4), bd));
  CHECK_THROWS_AS(PolynomialStateSpace(Mat::Zero(4, 3), Mat::Zero(2, 3), bd), DimensionMismatch);
  CHECK_THROWS_AS(PolynomialStateSpace(Mat::Zero(4, 4), Mat::Zero(2, 5), bd), DimensionMismatch);
  CHECK_THROWS_AS(PolynomialStateSpace(Mat::Zero(3, 3), Mat::Zero(2, 3), bd), DimensionMismatch);
  const Mpo mixed = oracle::random_mpo({1, 6}, {3, 2}, {1, 2, 1}, 2);
  CHECK_THROWS_AS(PolynomialStateSpace(Mat::Zero(4, 4), Mat::Zero(2, 4), mixed), DimensionMismatch);

  const PolynomialStateSpace model(stable_matrix(4, 0.9, 3), Mat::Zero(2, 4), bd);
  CHECK(model.n() == 4);
  CHECK(model.m() == 3);
  CHECK(model.p() == 2);
  CHECK(model.d() == 2);
  CHECK(model.spectral_radius() == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("dense input maps split the stacked network") {
  const PolynomialStateSpace model = random_model(3, 2, 2, 3, 4);
  const DenseInputMaps maps = dense_input_maps(model);
  const Mat full = oracle::mpo_dense_bruteforce(model.bd());
  CHECK(rel(maps.D, full.topRows(2)) <= 1e-14);
  CHECK(rel(maps.B, full.bottomRows(3)) <= 1e-14);
  CHECK_THROWS_AS(dense_input_maps(model, 10), SizeGuardError);
}

TEST_CASE("zero raw inputs with zero affine terms give the free response") {
  const PolynomialStateSpace model = random_model(4, 3, 2, 3, 5, true);
  const Vec x0 = oracle::random_matrix(4, 1, 6);
  const Mat u = Mat::Zero(20, 2);
  const SimulationRun tn = simulate_tn(model, x0, u, true);
  const SimulationRun kr = simulate_kron(model, x0, u);
  Mat At = Mat::Identity(4, 4);
  for (Index t = 0; t < 20; ++t) {
    const Vec expect = model.C() * At * x0;
    CHECK((tn.outputs.row(t).transpose() - expect).norm() <= 1e-12 * (1 + expect.norm()));
    CHECK((kr.outputs.row(t).transpose() - expect).norm() <= 1e-12 * (1 + expect.norm()));
    At = model.A() * At;
  }
  REQUIRE(tn.states.has_value());
  CHECK(tn.states->rows() == 20);
  CHECK(Vec(tn.states->row(0).transpose()) == x0);
}

TEST_CASE("a single step from rest is the direct feedthrough term") {
  const PolynomialStateSpace model = random_model(3, 3, 2, 2, 7);
  const Mat u = oracle::random_matrix(1, 2, 8);
  const Vec y0 = dense_input_maps(model).D * oracle::kron_power(oracle::augment(u.row(0)), 2);
  CHECK((simulate_tn(model, Vec::Zero(3), u).outputs.row(0).transpose() - y0).norm() <= 1e-13 * y0.norm());
  CHECK((simulate_kron(model, Vec::Zero(3), u).outputs.row(0).transpose() - y0).norm() <= 1e-13 * y0.norm());
}

TEST_CASE("network and Kronecker simulation agree on random models") {
  for (auto [m, d] : {std::pair<Index, int>{2, 1}, {3, 2}, {4, 3}, {3, 5}}) {
    CAPTURE(m);
    CAPTURE(d);
    const PolynomialStateSpace model = random_model(4, m, 3, d, 10 + m + d);
    const Vec x0 = oracle::random_matrix(4, 1, 9);
    const Mat u = oracle::random_matrix(100, m - 1, 11);
    const SimulationRun a = simulate_tn(model, x0, u, true);
    const SimulationRun b = simulate_kron(model, x0, u, true);
    CHECK(rel(a.outputs, b.outputs) <= 1e-12);
    CHECK(rel(*a.states, *b.states) <= 1e-12);
    CHECK(a.inputs == u);
    CHECK(a.x0 == x0);
  }
}

TEST_CASE("simulation matches the closed-form convolution sum") {
  const PolynomialStateSpace model = random_model(3, 3, 2, 2, 12);
  const DenseInputMaps maps = dense_input_maps(model);
  const Vec x0 = oracle::random_matrix(3, 1, 13);
  const Mat u = oracle::random_matrix(12, 2, 14);
  const Mat ref = oracle::closed_form_outputs(model.A(), maps.B, model.C(), maps.D, x0, u, 2);
  CHECK(rel(simulate_tn(model, x0, u).outputs, ref) <= 1e-12);
  CHECK(rel(simulate_kron(model, maps, x0, u).outputs, ref) <= 1e-12);
}

TEST_CASE("simulation is deterministic") {
  const PolynomialStateSpace model = random_model(3, 3, 2, 3, 15);
  const Mat u = oracle::random_matrix(50, 2, 16);
  CHECK(simulate_tn(model, Vec::Zero(3), u).outputs == simulate_tn(model, Vec::Zero(3), u).outputs);
}

TEST_CASE("free response of a stable model decays geometrically") {
  const PolynomialStateSpace model = random_model(5, 3, 2, 2, 17, true);
  const Vec x0 = Vec::Ones(5);
  const SimulationRun run = simulate_tn(model, x0, Mat::Zero(400, 2), true);
  // ||A^t|| <= c (rho + eps)^t; take rho + eps = 0.95 and fit c on the first samples.
  double c = 0.0;
  for (Index t = 0; t < 400; ++t) c = std::max(c, run.states->row(t).norm() / std::pow(0.95, t));
  CHECK(std::isfinite(c));
  CHECK(run.states->row(399).norm() <= c * std::pow(0.95, 399));
  CHECK(run.states->row(399).norm() < 1e-8 * x0.norm());
}

TEST_CASE("simulation rejects mismatched inputs") {
  const PolynomialStateSpace model = random_model(3, 3, 2, 2, 18);
  CHECK_THROWS_AS(simulate_tn(model, Vec::Zero(2), Mat::Zero(5, 2)), DimensionMismatch);
  CHECK_THROWS_AS(simulate_tn(model, Vec::Zero(3), Mat::Zero(5, 3)), DimensionMismatch);
  CHECK_THROWS_AS(simulate_kron(model, Vec::Zero(3), Mat::Zero(5, 1)), DimensionMismatch);
  Mat bad = Mat::Zero(5, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(simulate_tn(model, Vec::Zero(3), bad), NonFiniteInput);
}

TEST_CASE("network simulation cost grows about linearly in d at fixed ranks") {
  using Clock = std::chrono::steady_clock;
  const Mat u = oracle::random_matrix(4000, 4, 19);
  auto time_for = [&](int d) {
    const PolynomialStateSpace model(stable_matrix(5, 0.9, 20), oracle::random_matrix(3, 5, 21),
                                     random_bd(5, 3, 5, d, 8, 22, false));
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      const auto start = Clock::now();
      simulate_tn(model, Vec::Zero(5), u);
      best = std::min(best, std::chrono::duration<double>(Clock::now() - start).count());
    }
    return best;
  };
  const double t4 = time_for(4), t8 = time_for(8);
  CHECK(t8 <= 2.0 * 2.0 * t4);
}
