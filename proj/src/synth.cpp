#include "psstn/synth.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <limits>

#include "psstn/mpo_ops.hpp"

namespace psstn {

void ExperimentConfig::validate() const {
  if (n < 1 || m < 1 || p < 1 || d < 1) throw InputError("n, m, p and d must be positive");
  if (samples < 1 || validation_samples < 1) throw InputError("sample counts must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw InputError("spectral radius must lie in (0, 1)");
}

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t substream) {
  auto words = [](std::uint64_t v) {
    return std::array<std::uint32_t, 2>{static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
  };
  const auto a = words(seed), b = words(static_cast<std::uint64_t>(stream)), c = words(substream);
  std::seed_seq seq{a[0], a[1], b[0], b[1], c[0], c[1]};
  return std::mt19937_64(seq);
}

Eigen::MatrixXd standard_normal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  // Fill row by row so that a prefix of rows does not depend on `rows`.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
  return out;
}

PolynomialStateSpace random_stable_model(const ExperimentConfig& config) {
  config.validate();
  auto rng = make_rng(config.seed, Stream::kModel);
  Eigen::MatrixXd A = standard_normal(config.n, config.n, rng);
  const double radius = Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
  A *= config.rho / radius;

  Index md = 1;
  for (int k = 0; k < config.d; ++k) md *= config.m;
  const Eigen::MatrixXd C = standard_normal(config.p, config.n, rng);
  Eigen::MatrixXd bd = standard_normal(config.p + config.n, md, rng);  // [D; B]
  bd.col(0).setZero();

  Dims rows(static_cast<std::size_t>(config.d), 1), cols(static_cast<std::size_t>(config.d), config.m);
  rows.back() = config.p + config.n;
  return PolynomialStateSpace(std::move(A), C, zero_first_column(mpo_from_dense(bd, rows, cols, 1e-14)));
}

Eigen::MatrixXd add_noise_snr(const Eigen::MatrixXd& outputs, double snr_db, std::mt19937_64& rng) {
  if (std::isinf(snr_db) && snr_db > 0) return outputs;
  if (!std::isfinite(snr_db)) throw InputError("SNR must be finite or +inf");
  if (outputs.squaredNorm() == 0.0) throw InputError("cannot set an SNR for a zero-power signal");
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd noise(outputs.rows(), outputs.cols());
  for (Index i = 0; i < noise.rows(); ++i)
    for (Index j = 0; j < noise.cols(); ++j) noise(i, j) = dist(rng);
  const double ratio = std::pow(10.0, -snr_db / 10.0);
  for (Index j = 0; j < outputs.cols(); ++j) {
    const double signal_power = outputs.col(j).squaredNorm() / static_cast<double>(outputs.rows());
    noise.col(j) *= std::sqrt(signal_power * ratio);
  }
  return outputs + noise;
}

Eigen::MatrixXd add_noise_snr(const Eigen::MatrixXd& outputs, double snr_db, std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::kNoise);
  return add_noise_snr(outputs, snr_db, rng);
}

double rel_val_error(const Eigen::MatrixXd& y_ref, const Eigen::MatrixXd& y_hat) {
  if (y_ref.rows() != y_hat.rows() || y_ref.cols() != y_hat.cols())
    throw DimensionMismatch("rel_val_error: shapes differ");
  const double denom = y_ref.norm();
  if (denom == 0.0) throw InputError("rel_val_error: reference signal is zero");
  return (y_ref - y_hat).norm() / denom;
}

double sim_snr(const Eigen::MatrixXd& y_clean, const Eigen::MatrixXd& y_hat) {
  if (y_clean.rows() != y_hat.rows() || y_clean.cols() != y_hat.cols())
    throw DimensionMismatch("sim_snr: shapes differ");
  const double err = (y_clean - y_hat).squaredNorm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(y_clean.squaredNorm() / err);
}

double measured_snr(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& noisy) { return sim_snr(clean, noisy); }

Experiment make_experiment(const ExperimentConfig& config) {
  Experiment e;
  e.config = config;
  e.truth = random_stable_model(config);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(config.n);

  auto ident_rng = make_rng(config.seed, Stream::kIdentInputs);
  const Eigen::MatrixXd u = standard_normal(config.samples, config.m - 1, ident_rng);
  e.ident = SignalLog(u, simulate_tn(e.truth, x0, u).outputs);

  auto val_rng = make_rng(config.seed, Stream::kValidationInputs);
  e.validation_inputs = standard_normal(config.validation_samples, config.m - 1, val_rng);
  e.validation_outputs = simulate_tn(e.truth, x0, e.validation_inputs).outputs;
  return e;
}

double validation_error(const Experiment& experiment, const PolynomialStateSpace& model) {
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model.n());
  return rel_val_error(experiment.validation_outputs, simulate_tn(model, x0, experiment.validation_inputs).outputs);
}

std::vector<NoiseRung> noise_ladder(const Experiment& experiment, const TnOptions& options) {
  const auto& cfg = experiment.config;
  const InputFactorization factors =
      factor_inputs(experiment.ident.inputs(), experiment.ident.output_dim(), cfg.d, options.rank_tol);
  std::vector<NoiseRung> out;
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    auto rng = make_rng(cfg.seed, Stream::kNoise, i);
    const Eigen::MatrixXd noisy = add_noise_snr(experiment.ident.outputs(), cfg.snr_db[i], rng);
    const Identification id = identify_outputs(factors, noisy, options);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(id.model.n());
    const Eigen::MatrixXd y_hat = simulate_tn(id.model, x0, experiment.validation_inputs).outputs;

    NoiseRung rung;
    rung.id_snr_db = cfg.snr_db[i];
    rung.measured_id_snr_db = measured_snr(experiment.ident.outputs(), noisy);
    rung.rel_val_error = rel_val_error(experiment.validation_outputs, y_hat);
    rung.sim_snr_db = sim_snr(experiment.validation_outputs, y_hat);
    rung.n = id.report.n;
    out.push_back(rung);
  }
  return out;
}

}  // namespace psstn
