#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "psstn/errors.hpp"
#include "psstn/synth.hpp"

using namespace psstn;
using oracle::Mat;
using oracle::Vec;

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.rho = 1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ExperimentConfig{};
  c.n = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = ExperimentConfig{};
  c.samples = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
}

TEST_CASE("random stable model") {
  ExperimentConfig c;
  c.d = 3;
  const PolynomialStateSpace model = random_stable_model(c);
  CHECK(std::abs(model.spectral_radius() - 0.9) <= 1e-12);
  CHECK(model.n() == 5);
  CHECK(model.m() == 5);
  CHECK(model.p() == 3);
  CHECK(model.d() == 3);
  const DenseInputMaps maps = dense_input_maps(model);
  CHECK(maps.B.col(0).isZero(0.0));
  CHECK(maps.D.col(0).isZero(0.0));
  CHECK(maps.B.rows() == 5);
  CHECK(maps.D.cols() == 125);

  const PolynomialStateSpace again = random_stable_model(c);
  CHECK(again.A() == model.A());
  CHECK(to_dense(again.bd()) == to_dense(model.bd()));
  c.seed = 2;
  CHECK(random_stable_model(c).A() != model.A());
}

TEST_CASE("random streams are independent and reproducible") {
  auto a = make_rng(7, Stream::kIdentInputs), b = make_rng(7, Stream::kIdentInputs);
  auto c = make_rng(7, Stream::kNoise), d = make_rng(7, Stream::kNoise, 1);
  const Mat xa = standard_normal(10, 3, a), xb = standard_normal(10, 3, b);
  CHECK(xa == xb);
  CHECK(standard_normal(10, 3, c) != xa);
  auto c2 = make_rng(7, Stream::kNoise);
  CHECK(standard_normal(10, 3, c2) != standard_normal(10, 3, d));

  auto e = make_rng(1, Stream::kModel), f = make_rng(1, Stream::kModel);
  const Mat longer = standard_normal(20, 4, e), shorter = standard_normal(8, 4, f);
  CHECK(Mat(longer.topRows(8)) == shorter);
}

TEST_CASE("additive noise at a requested SNR") {
  const Mat y = oracle::random_matrix(4096, 3, 1) * 2.5;
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(add_noise_snr(y, inf, 5) == y);
  for (double snr : {5.0, 10.0, 20.0, 30.0}) {
    CAPTURE(snr);
    const Mat noisy = add_noise_snr(y, snr, 11);
    CHECK(std::abs(measured_snr(y, noisy) - snr) <= 0.1);
    for (Index j = 0; j < 3; ++j) CHECK(std::abs(measured_snr(y.col(j), noisy.col(j)) - snr) <= 0.2);
    CHECK(add_noise_snr(y, snr, 11) == noisy);
    CHECK(add_noise_snr(y, snr, 12) != noisy);
  }
  CHECK_THROWS_AS(add_noise_snr(Mat::Zero(10, 2), 10.0, 1), InputError);
  CHECK_THROWS_AS(add_noise_snr(y, std::numeric_limits<double>::quiet_NaN(), 1), InputError);
}

TEST_CASE("relative error and simulation SNR") {
  const Mat y = oracle::random_matrix(50, 2, 2);
  CHECK(rel_val_error(y, y) == 0.0);
  CHECK(rel_val_error(y, Mat::Zero(50, 2)) == 1.0);
  CHECK(std::abs(rel_val_error(y, 1.1 * y) - 0.1) <= 1e-15);
  CHECK_THROWS_AS(rel_val_error(Mat::Zero(3, 1), Mat::Ones(3, 1)), InputError);
  CHECK_THROWS_AS(rel_val_error(y, Mat::Zero(49, 2)), DimensionMismatch);

  CHECK(std::isinf(sim_snr(y, y)));
  CHECK(sim_snr(y, y) > 0);
  CHECK(sim_snr(y, Mat::Zero(50, 2)) == doctest::Approx(0.0));
  CHECK(sim_snr(y, y + y / std::sqrt(10.0)) == doctest::Approx(10.0));
}

TEST_CASE("experiments are reproducible and the round trip recovers the system") {
  ExperimentConfig c;
  c.n = 3;
  c.m = 3;
  c.p = 2;
  c.d = 2;
  c.samples = 300;
  c.validation_samples = 200;
  const Experiment a = make_experiment(c), b = make_experiment(c);
  CHECK(a.ident.outputs() == b.ident.outputs());
  CHECK(a.validation_inputs == b.validation_inputs);
  CHECK(a.validation_inputs.rows() == 200);
  CHECK(a.validation_inputs.topRows(10) != a.ident.inputs().topRows(10));
  CHECK(validation_error(a, a.truth) == 0.0);
  CHECK(validation_error(a, tnmoesp_identify(a.ident, 2).model) <= 1e-10);
}

TEST_CASE("noise ladder on a small system") {
  ExperimentConfig c;
  c.n = 3;
  c.m = 3;
  c.p = 2;
  c.d = 2;
  c.samples = 2000;
  c.validation_samples = 1000;
  c.snr_db = {10.0, 20.0, 40.0};
  const Experiment e = make_experiment(c);
  TnOptions opt;
  opt.order = OrderSpec::fixed(3);
  const auto rungs = noise_ladder(e, opt);
  REQUIRE(rungs.size() == 3);
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    CHECK(rungs[i].id_snr_db == c.snr_db[i]);
    CHECK(std::abs(rungs[i].measured_id_snr_db - c.snr_db[i]) <= 0.3);
    CHECK(rungs[i].n == 3);
    CHECK(rungs[i].sim_snr_db >= rungs[i].id_snr_db - 1.0);
    if (i) CHECK(rungs[i].rel_val_error < rungs[i - 1].rel_val_error);
  }
  const auto again = noise_ladder(e, opt);
  CHECK(again[1].rel_val_error == rungs[1].rel_val_error);
}
