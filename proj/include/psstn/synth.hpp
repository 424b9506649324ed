#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

#include "psstn/hankel.hpp"
#include "psstn/model.hpp"
#include "psstn/tnmoesp.hpp"

namespace psstn {

struct ExperimentConfig {
  Index n = 5;
  Index m = 5;  ///< counts the constant input
  Index p = 3;
  int d = 2;
  Index samples = 2048;
  Index validation_samples = 1024;
  std::uint64_t seed = 1;
  std::vector<double> snr_db;
  double rho = 0.9;  ///< spectral radius of A

  /// Throws InputError on nonpositive sizes or rho outside (0, 1).
  void validate() const;
};

/// Independent random streams derived from one experiment seed.
enum class Stream : std::uint64_t {
  kModel = 1,
  kIdentInputs = 2,
  kValidationInputs = 3,
  kNoise = 4,
};

/// mt19937_64 seeded from seed_seq{seed, stream, substream}.
std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t substream = 0);

/// Matrix of independent standard normal draws.
Eigen::MatrixXd standard_normal(Index rows, Index cols, std::mt19937_64& rng);

/// A standard normal and rescaled to spectral radius rho; B, C, D standard
/// normal with their affine columns zeroed; [D; B] converted to a network by
/// sequential SVD at tolerance 1e-14.
PolynomialStateSpace random_stable_model(const ExperimentConfig& config);

/// Adds zero-mean Gaussian noise to every channel (column) so that its
/// signal-to-noise power ratio is `snr_db`. +inf returns the input unchanged.
/// Channels without power receive no noise; an all-zero signal is an error.
Eigen::MatrixXd add_noise_snr(const Eigen::MatrixXd& outputs, double snr_db, std::mt19937_64& rng);
Eigen::MatrixXd add_noise_snr(const Eigen::MatrixXd& outputs, double snr_db, std::uint64_t seed);

/// ||y_ref - y_hat||_F / ||y_ref||_F.
double rel_val_error(const Eigen::MatrixXd& y_ref, const Eigen::MatrixXd& y_hat);

/// 10 log10(sum y^2 / sum (y - y_hat)^2); +inf for an exact match.
double sim_snr(const Eigen::MatrixXd& y_clean, const Eigen::MatrixXd& y_hat);

/// Measured SNR of a noisy record against its clean version.
double measured_snr(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& noisy);

/// Truth model plus noiseless identification and validation records, all
/// started from x0 = 0.
struct Experiment {
  ExperimentConfig config;
  PolynomialStateSpace truth;
  SignalLog ident;
  Eigen::MatrixXd validation_inputs;
  Eigen::MatrixXd validation_outputs;
};

Experiment make_experiment(const ExperimentConfig& config);

/// Relative validation error of `model` on the experiment's validation record.
double validation_error(const Experiment& experiment, const PolynomialStateSpace& model);

struct NoiseRung {
  double id_snr_db = 0.0;
  double measured_id_snr_db = 0.0;
  double rel_val_error = 0.0;
  double sim_snr_db = 0.0;
  Index n = 0;
};

/// Identifies the experiment's system from noisy copies of the
/// identification outputs, one per entry of config.snr_db, reusing a single
/// factorization of the inputs. Rung i draws its noise from substream i.
std::vector<NoiseRung> noise_ladder(const Experiment& experiment, const TnOptions& options);

}  // namespace psstn
