#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace psstn::cli;
  CLI::App app{"Identification and simulation of polynomial state space models with tensor networks"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Create a random stable model and a simulated data record");
  g->add_option("--n", gen.n, "State dimension")->capture_default_str();
  g->add_option("--m", gen.m, "Input dimension, counting the constant input")->capture_default_str();
  g->add_option("--p", gen.p, "Output dimension")->capture_default_str();
  g->add_option("--d", gen.d, "Polynomial degree")->capture_default_str();
  g->add_option("--samples", gen.samples, "Number of samples")->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--rho", gen.rho, "Spectral radius of A")->capture_default_str();
  g->add_option("--snr", gen.snr_db, "Output SNR in dB (default: noiseless)");
  g->add_option("--out-model", gen.out_model, "Model container to write")->capture_default_str();
  g->add_option("--out-data", gen.out_data, "Signal CSV to write")->capture_default_str();

  IdentifyOptions id;
  auto* i = app.add_subcommand("identify", "Identify a model from a signal CSV");
  i->add_option("--data", id.data, "Signal CSV")->required();
  i->add_option("--degree", id.degree, "Polynomial degree")->capture_default_str();
  i->add_option("--order", id.order, "System order: integer, 'auto' or 'gap'")->capture_default_str();
  i->add_option("--method", id.method, "tn or dense")->capture_default_str();
  i->add_option("--tol", id.tol, "Relative threshold for --order auto")->capture_default_str();
  i->add_flag("!--no-recompress", id.recompress, "Keep the doubled ranks after the affine projection");
  i->add_option("--out", id.out, "Model container to write")->capture_default_str();

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Simulate a model on the inputs of a signal CSV");
  s->add_option("--model", sim.model, "Model container")->required();
  s->add_option("--input", sim.input, "Signal CSV providing u columns")->required();
  s->add_option("--x0", sim.x0, "Initial state, comma separated (default zeros)");
  s->add_option("--out", sim.out, "Signal CSV to write")->capture_default_str();

  ValidateOptions val;
  auto* v = app.add_subcommand("validate", "Compare the outputs of two signal CSVs");
  v->add_option("--ref", val.ref, "Reference signal CSV")->required();
  v->add_option("--est", val.est, "Estimated signal CSV")->required();

  BenchOptions bench;
  auto* b = app.add_subcommand("bench", "Identification and simulation timings over a degree sweep");
  b->add_option("--min-degree", bench.min_degree)->capture_default_str();
  b->add_option("--max-degree", bench.max_degree)->capture_default_str();
  b->add_option("--n", bench.n)->capture_default_str();
  b->add_option("--m", bench.m)->capture_default_str();
  b->add_option("--p", bench.p)->capture_default_str();
  b->add_option("--samples", bench.samples)->capture_default_str();
  b->add_option("--validation-samples", bench.validation_samples)->capture_default_str();
  b->add_option("--sim-samples", bench.sim_samples)->capture_default_str();
  b->add_option("--seed", bench.seed)->capture_default_str();
  b->add_option("--out", bench.out, "Prefix for <out>_identify.csv and <out>_simulate.csv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  return guarded(std::cerr, [&] {
    if (*g) return cmd_generate(gen, std::cout);
    if (*i) return cmd_identify(id, std::cout);
    if (*s) return cmd_simulate(sim, std::cout);
    if (*v) return cmd_validate(val, std::cout);
    return cmd_bench(bench, std::cout);
  });
}
