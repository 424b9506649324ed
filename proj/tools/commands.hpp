#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

namespace psstn::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kInputError = 2,        ///< bad flags, files, shapes or too little data
  kNumericalFailure = 3,  ///< not persistently exciting, unidentifiable, non-finite
  kSizeGuard = 4,         ///< a dense object would exceed the guard
};

struct GenerateOptions {
  long n = 5, m = 5, p = 3, d = 2;
  long samples = 2048;
  std::uint64_t seed = 1;
  double rho = 0.9;
  double snr_db = std::numeric_limits<double>::infinity();
  std::string out_model = "model.psstn";
  std::string out_data = "data.csv";
};

struct IdentifyOptions {
  std::string data;
  int degree = 2;
  std::string order = "auto";  ///< integer, "auto" (threshold) or "gap"
  std::string method = "tn";   ///< "tn" or "dense"
  double tol = 1e-8;
  bool recompress = true;
  std::string out = "identified.psstn";
};

struct SimulateOptions {
  std::string model;
  std::string input;
  std::string x0;  ///< comma separated; empty means zeros
  std::string out = "simulated.csv";
};

struct ValidateOptions {
  std::string ref;
  std::string est;
};

struct BenchOptions {
  int min_degree = 2;
  int max_degree = 8;
  long n = 5, m = 5, p = 3;
  long samples = 2048;
  long validation_samples = 1024;
  long sim_samples = 5000;
  std::uint64_t seed = 1;
  std::string out = "bench";
};

int cmd_generate(const GenerateOptions& opt, std::ostream& out);
int cmd_identify(const IdentifyOptions& opt, std::ostream& out);
int cmd_simulate(const SimulateOptions& opt, std::ostream& out);
int cmd_validate(const ValidateOptions& opt, std::ostream& out);
int cmd_bench(const BenchOptions& opt, std::ostream& out);

/// Runs `body`, mapping library errors to exit codes and printing them to `err`.
template <typename Body>
int guarded(std::ostream& err, Body&& body);

}  // namespace psstn::cli

#include "commands_impl.hpp"
