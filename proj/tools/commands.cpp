#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "psstn/io.hpp"
#include "psstn/moesp_dense.hpp"
#include "psstn/synth.hpp"
#include "psstn/tnmoesp.hpp"

namespace psstn::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string join(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

OrderSpec parse_order(const std::string& text, double tol) {
  if (text == "auto") return OrderSpec::threshold(tol);
  if (text == "gap") return OrderSpec::gap();
  std::size_t used = 0;
  long n = -1;
  try {
    n = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || n < 0) throw InputError("--order must be a nonnegative integer, 'auto' or 'gap'");
  return OrderSpec::fixed(n);
}

Eigen::VectorXd parse_state(const std::string& text, Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (text.empty()) return x;
  std::istringstream ss(text);
  std::string field;
  Index i = 0;
  while (std::getline(ss, field, ',')) {
    if (i >= n) throw DimensionMismatch("--x0 has more than n = " + std::to_string(n) + " entries");
    try {
      x(i++) = std::stod(field);
    } catch (const std::exception&) {
      throw InputError("--x0: cannot parse '" + field + "'");
    }
  }
  if (i != n) throw DimensionMismatch("--x0 has " + std::to_string(i) + " entries, model order is " + std::to_string(n));
  return x;
}

void print_report(std::ostream& out, const IdentificationReport& rep) {
  out << "k=" << rep.k << " N=" << rep.N << " r=" << rep.r << " observed_rank=" << rep.observed_rank << '\n';
  if (!rep.input_ranks.empty()) out << "input_tn_ranks=" << join(rep.input_ranks) << '\n';
  if (rep.rank_gap > 0) out << "rank_gap=" << format_double(rep.rank_gap) << '\n';
  out << "order=" << rep.n << '\n';
  out << "model_tn_ranks=" << join(rep.model_ranks) << '\n';
  out << "l22_singular_values=";
  for (Index i = 0; i < rep.hankel_singular_values.size(); ++i)
    out << (i ? "," : "") << format_double(rep.hankel_singular_values(i));
  out << '\n';
  for (const auto& w : rep.warnings) out << "warning: " << w << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.precision(17);
  return f;
}

}  // namespace

int cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.n = opt.n;
  cfg.m = opt.m;
  cfg.p = opt.p;
  cfg.d = static_cast<int>(opt.d);
  cfg.samples = opt.samples;
  cfg.seed = opt.seed;
  cfg.rho = opt.rho;
  cfg.validate();

  const PolynomialStateSpace model = random_stable_model(cfg);
  auto rng = make_rng(cfg.seed, Stream::kIdentInputs);
  const Eigen::MatrixXd u = standard_normal(cfg.samples, cfg.m - 1, rng);
  Eigen::MatrixXd y = simulate_tn(model, Eigen::VectorXd::Zero(cfg.n), u).outputs;
  if (!(std::isinf(opt.snr_db) && opt.snr_db > 0)) y = add_noise_snr(y, opt.snr_db, cfg.seed);

  write_model(opt.out_model, model);
  write_signal_csv(opt.out_data, {u, y});
  out << "wrote " << opt.out_model << " (n=" << cfg.n << " m=" << cfg.m << " p=" << cfg.p << " d=" << cfg.d
      << ", ranks " << join(model.bd().ranks()) << ") and " << opt.out_data << " (" << cfg.samples
      << " samples)\n";
  return kOk;
}

int cmd_identify(const IdentifyOptions& opt, std::ostream& out) {
  const SignalTable table = read_signal_csv(opt.data);
  if (table.outputs.cols() == 0) throw InputError(opt.data + " has no output columns");
  const SignalLog log(table.inputs, table.outputs);
  const OrderSpec order = parse_order(opt.order, opt.tol);

  const auto start = Clock::now();
  Identification id;
  if (opt.method == "tn") {
    TnOptions tn;
    tn.order = order;
    tn.recompress = opt.recompress;
    id = tnmoesp_identify(log, opt.degree, tn);
  } else if (opt.method == "dense") {
    id = moesp_identify_dense(log, opt.degree, order);
  } else {
    throw InputError("--method must be 'tn' or 'dense'");
  }
  const double elapsed = seconds_since(start);

  write_model(opt.out, id.model);
  out << "method=" << opt.method << " d=" << opt.degree << " runtime_s=" << format_double(elapsed) << '\n';
  print_report(out, id.report);
  out << "wrote " << opt.out << '\n';
  return kOk;
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  const PolynomialStateSpace model = read_model(opt.model);
  const SignalTable input = read_signal_csv(opt.input);
  const Eigen::VectorXd x0 = parse_state(opt.x0, model.n());
  const SimulationRun run = simulate_tn(model, x0, input.inputs);
  write_signal_csv(opt.out, {input.inputs, run.outputs});
  out << "wrote " << opt.out << " (" << run.outputs.rows() << " samples)\n";
  return kOk;
}

int cmd_validate(const ValidateOptions& opt, std::ostream& out) {
  const SignalTable ref = read_signal_csv(opt.ref);
  const SignalTable est = read_signal_csv(opt.est);
  if (ref.outputs.rows() != est.outputs.rows() || ref.outputs.cols() != est.outputs.cols())
    throw DimensionMismatch("output shapes differ: " + std::to_string(ref.outputs.rows()) + "x" +
                            std::to_string(ref.outputs.cols()) + " vs " + std::to_string(est.outputs.rows()) + "x" +
                            std::to_string(est.outputs.cols()));
  out << "rel_error=" << format_double(rel_val_error(ref.outputs, est.outputs)) << '\n';
  out << "sim_snr_db=" << format_double(sim_snr(ref.outputs, est.outputs)) << '\n';
  return kOk;
}

int cmd_bench(const BenchOptions& opt, std::ostream& out) {
  if (opt.min_degree < 1 || opt.max_degree < opt.min_degree) throw InputError("invalid degree range");
  auto ident_csv = open_out(opt.out + "_identify.csv");
  auto sim_csv = open_out(opt.out + "_simulate.csv");
  ident_csv << "d,method,runtime_s,rel_val_error\n";
  sim_csv << "d,method,samples,runtime_s\n";

  for (int d = opt.min_degree; d <= opt.max_degree; ++d) {
    ExperimentConfig cfg;
    cfg.n = opt.n;
    cfg.m = opt.m;
    cfg.p = opt.p;
    cfg.d = d;
    cfg.samples = opt.samples;
    cfg.validation_samples = opt.validation_samples;
    cfg.seed = opt.seed;
    const Experiment e = make_experiment(cfg);

    std::optional<PolynomialStateSpace> tn_model;
    for (const std::string method : {"dense", "tn"}) {
      std::string runtime = "NA", error = "NA";
      const auto start = Clock::now();
      try {
        Identification id = method == "tn" ? tnmoesp_identify(e.ident, d) : moesp_identify_dense(e.ident, d);
        runtime = format_double(seconds_since(start));
        error = format_double(validation_error(e, id.model));
        if (method == "tn") tn_model = std::move(id.model);
      } catch (const SizeGuardError& err) {
        out << "d=" << d << " " << method << ": " << err.what() << '\n';
      } catch (const Error& err) {
        out << "d=" << d << " " << method << " failed: " << err.what() << '\n';
      }
      ident_csv << d << ',' << method << ',' << runtime << ',' << error << '\n';
      out << "d=" << d << " method=" << method << " runtime_s=" << runtime << " rel_val_error=" << error << '\n';
    }
    if (!tn_model) continue;

    auto rng = make_rng(opt.seed, Stream::kValidationInputs, 1);
    const Eigen::MatrixXd u = standard_normal(opt.sim_samples, opt.m - 1, rng);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(tn_model->n());
    auto start = Clock::now();
    simulate_tn(*tn_model, x0, u);
    const double tn_time = seconds_since(start);
    std::string kron_time = "NA";
    try {
      const DenseInputMaps maps = dense_input_maps(*tn_model);
      start = Clock::now();
      simulate_kron(*tn_model, maps, x0, u);
      kron_time = format_double(seconds_since(start));
    } catch (const SizeGuardError&) {
    }
    sim_csv << d << ",tn," << opt.sim_samples << ',' << format_double(tn_time) << '\n';
    sim_csv << d << ",kron," << opt.sim_samples << ',' << kron_time << '\n';
    out << "d=" << d << " simulate tn_s=" << format_double(tn_time) << " kron_s=" << kron_time << '\n';
  }
  out << "wrote " << opt.out << "_identify.csv and " << opt.out << "_simulate.csv\n";
  return kOk;
}

}  // namespace psstn::cli
