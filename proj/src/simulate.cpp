#include "psstn/model.hpp"

#include <Eigen/Eigenvalues>

#include "psstn/errors.hpp"

namespace psstn {
namespace {

void check_run_args(const PolynomialStateSpace& model, const Eigen::VectorXd& x0, const Eigen::MatrixXd& inputs) {
  if (x0.size() != model.n())
    throw DimensionMismatch("initial state has length " + std::to_string(x0.size()) + ", model order is " +
                            std::to_string(model.n()));
  if (inputs.cols() != model.m() - 1)
    throw DimensionMismatch("inputs have " + std::to_string(inputs.cols()) + " channels, model expects " +
                            std::to_string(model.m() - 1));
  if (!inputs.allFinite()) throw NonFiniteInput("inputs contain non-finite samples");
}

SimulationRun start_run(const PolynomialStateSpace& model, const Eigen::VectorXd& x0,
                        const Eigen::MatrixXd& inputs, bool record_states) {
  SimulationRun run;
  run.x0 = x0;
  run.inputs = inputs;
  run.outputs.resize(inputs.rows(), model.p());
  if (record_states) run.states = Eigen::MatrixXd(inputs.rows(), model.n());
  return run;
}

}  // namespace

PolynomialStateSpace::PolynomialStateSpace(Eigen::MatrixXd A, Eigen::MatrixXd C, Mpo bd)
    : A_(std::move(A)), C_(std::move(C)), bd_(std::move(bd)) {
  if (A_.rows() != A_.cols()) throw DimensionMismatch("A must be square");
  if (C_.cols() != A_.rows())
    throw DimensionMismatch("C has " + std::to_string(C_.cols()) + " columns but A is " +
                            std::to_string(A_.rows()) + "x" + std::to_string(A_.rows()));
  if (bd_.num_cores() == 0) throw DimensionMismatch("input map network has no cores");
  const Dims rows = bd_.row_dims();
  const Dims cols = bd_.col_dims();
  m_ = cols.front();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (cols[k] != m_) throw DimensionMismatch("input map network column dims must all equal m");
    const Index expected = (k + 1 == rows.size()) ? C_.rows() + A_.rows() : 1;
    if (rows[k] != expected)
      throw DimensionMismatch("input map network row dims must be (1, ..., 1, p+n), got " +
                              detail::format_dims(rows));
  }
}

double PolynomialStateSpace::spectral_radius() const {
  if (A_.size() == 0) return 0.0;
  return Eigen::EigenSolver<Eigen::MatrixXd>(A_, false).eigenvalues().cwiseAbs().maxCoeff();
}

DenseInputMaps dense_input_maps(const PolynomialStateSpace& model, std::uint64_t guard) {
  const Eigen::MatrixXd bd = to_dense(model.bd(), guard);
  return {bd.topRows(model.p()), bd.bottomRows(model.n())};
}

SimulationRun simulate_tn(const PolynomialStateSpace& model, const Eigen::VectorXd& x0,
                          const Eigen::MatrixXd& inputs, bool record_states) {
  check_run_args(model, x0, inputs);
  SimulationRun run = start_run(model, x0, inputs, record_states);
  const Index m = model.m(), p = model.p(), n = model.n();
  const std::size_t d = model.bd().num_cores();

  std::vector<Eigen::Map<const Eigen::MatrixXd>> slabs;
  Index widest = 1;
  for (const auto& core : model.bd().cores()) {
    slabs.emplace_back(core.data().data(), core.dim(0), core.size() / core.dim(0));
    widest = std::max(widest, core.size() / core.dim(0));
  }

  Eigen::VectorXd u(m), z, x = x0;
  Eigen::RowVectorXd row(widest);
  z.resize(widest);
  for (Index t = 0; t < inputs.rows(); ++t) {
    u(0) = 1.0;
    u.tail(m - 1) = inputs.row(t).transpose();
    Index r = 1;
    z(0) = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      const auto& g = slabs[k];
      auto head = row.head(g.cols());
      head.noalias() = z.head(r).transpose() * g;
      // head is (n_k, m, r_{k+1}) with n_k = 1 except on the last core.
      const Index lead = (k + 1 == d) ? p + n : 1;
      const Index next = g.cols() / (lead * m);
      if (k + 1 == d) {
        z.head(lead).noalias() = Eigen::Map<const Eigen::MatrixXd>(head.data(), lead, m) * u;
        r = lead;
      } else {
        z.head(next).noalias() = Eigen::Map<const Eigen::MatrixXd>(head.data(), m, next).transpose() * u;
        r = next;
      }
    }
    if (run.states) run.states->row(t) = x.transpose();
    run.outputs.row(t) = (model.C() * x + z.head(p)).transpose();
    x = model.A() * x + z.segment(p, n);
  }
  return run;
}

SimulationRun simulate_kron(const PolynomialStateSpace& model, const DenseInputMaps& maps,
                            const Eigen::VectorXd& x0, const Eigen::MatrixXd& inputs, bool record_states) {
  check_run_args(model, x0, inputs);
  const Index m = model.m(), p = model.p(), n = model.n();
  Index md = 1;
  for (int k = 0; k < model.d(); ++k) md *= m;
  if (maps.D.rows() != p || maps.B.rows() != n || maps.D.cols() != md || maps.B.cols() != md)
    throw DimensionMismatch("dense input maps do not match the model dimensions");

  SimulationRun run = start_run(model, x0, inputs, record_states);
  Eigen::MatrixXd bd(p + n, md);
  bd << maps.D, maps.B;

  Eigen::VectorXd u(m), power(md), scratch(md), z(p + n), x = x0;
  for (Index t = 0; t < inputs.rows(); ++t) {
    u(0) = 1.0;
    u.tail(m - 1) = inputs.row(t).transpose();
    // power <- u (x) power, built up one factor at a time.
    Index len = m;
    power.head(m) = u;
    for (int k = 1; k < model.d(); ++k) {
      scratch.head(len) = power.head(len);
      for (Index i = 0; i < m; ++i) power.segment(i * len, len) = u(i) * scratch.head(len);
      len *= m;
    }
    z.noalias() = bd * power;
    if (run.states) run.states->row(t) = x.transpose();
    run.outputs.row(t) = (model.C() * x + z.head(p)).transpose();
    x = model.A() * x + z.tail(n);
  }
  return run;
}

SimulationRun simulate_kron(const PolynomialStateSpace& model, const Eigen::VectorXd& x0,
                            const Eigen::MatrixXd& inputs, bool record_states) {
  return simulate_kron(model, dense_input_maps(model), x0, inputs, record_states);
}

}  // namespace psstn
