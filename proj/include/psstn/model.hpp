#pragma once

#include <Eigen/Dense>

#include <optional>

#include "psstn/config.hpp"
#include "psstn/tensor.hpp"

namespace psstn {

/// x_{t+1} = A x_t + B u_t^{(d)},  y_t = C x_t + D u_t^{(d)}
///
/// where u_t = (1, u_t^(1), ..., u_t^(m-1)) and u_t^{(d)} is its d-fold
/// Kronecker power. D and B are kept stacked as one (p+n) x m^d tensor-train
/// matrix `bd` with row dims (1, ..., 1, p+n) and column dims (m, ..., m).
class PolynomialStateSpace {
 public:
  PolynomialStateSpace() = default;
  PolynomialStateSpace(Eigen::MatrixXd A, Eigen::MatrixXd C, Mpo bd);

  Index n() const { return A_.rows(); }
  Index m() const { return m_; }
  Index p() const { return C_.rows(); }
  int d() const { return static_cast<int>(bd_.num_cores()); }

  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::MatrixXd& C() const { return C_; }
  const Mpo& bd() const { return bd_; }

  double spectral_radius() const;

 private:
  Eigen::MatrixXd A_;
  Eigen::MatrixXd C_;
  Mpo bd_;
  Index m_ = 0;
};

/// Dense D (p x m^d) and B (n x m^d).
struct DenseInputMaps {
  Eigen::MatrixXd D;
  Eigen::MatrixXd B;
};

DenseInputMaps dense_input_maps(const PolynomialStateSpace& model, std::uint64_t guard = dense_guard());

struct SimulationRun {
  Eigen::VectorXd x0;
  Eigen::MatrixXd inputs;   ///< L x (m-1), raw
  Eigen::MatrixXd outputs;  ///< L x p
  std::optional<Eigen::MatrixXd> states;  ///< L x n, x_0 .. x_{L-1}
};

/// Contracts each augmented input through the cores of bd instead of forming
/// u_t^{(d)}; O(d m r^2 + n^2) per step.
SimulationRun simulate_tn(const PolynomialStateSpace& model, const Eigen::VectorXd& x0,
                          const Eigen::MatrixXd& inputs, bool record_states = false);

/// Reference simulation with explicit Kronecker powers and dense B, D.
SimulationRun simulate_kron(const PolynomialStateSpace& model, const DenseInputMaps& maps,
                            const Eigen::VectorXd& x0, const Eigen::MatrixXd& inputs,
                            bool record_states = false);

SimulationRun simulate_kron(const PolynomialStateSpace& model, const Eigen::VectorXd& x0,
                            const Eigen::MatrixXd& inputs, bool record_states = false);

}  // namespace psstn
