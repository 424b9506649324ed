#include "psstn/numerics.hpp"

#include <cmath>
#include <limits>

namespace psstn {
namespace {

void require_finite(const Eigen::MatrixXd& a, const char* what) {
  if (!a.allFinite()) throw NonFiniteInput(std::string(what) + ": input has non-finite entries");
}

// Largest-magnitude entry positive, lowest index wins ties.
void fix_signs(Eigen::MatrixXd& U, Eigen::MatrixXd& V) {
  for (Index j = 0; j < U.cols(); ++j) {
    Index best = 0;
    double mag = -1.0;
    for (Index i = 0; i < U.rows(); ++i) {
      if (std::abs(U(i, j)) > mag) {
        mag = std::abs(U(i, j));
        best = i;
      }
    }
    if (U.rows() > 0 && U(best, j) < 0.0) {
      U.col(j) *= -1.0;
      V.col(j) *= -1.0;
    }
  }
}

SvdResult bdc(const Eigen::MatrixXd& a) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalFailure("SVD did not converge");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace

SvdResult svd_econ(const Eigen::MatrixXd& a) {
  require_finite(a, "svd_econ");
  SvdResult out;
  if (a.size() == 0) {
    const Index k = std::min(a.rows(), a.cols());
    out.U = Eigen::MatrixXd::Zero(a.rows(), k);
    out.s = Eigen::VectorXd::Zero(k);
    out.V = Eigen::MatrixXd::Zero(a.cols(), k);
    return out;
  }
  // Strongly rectangular inputs are reduced to a square triangle first.
  if (a.rows() > 2 * a.cols() && a.cols() > 16) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Index n = a.cols();
    Eigen::MatrixXd R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    SvdResult inner = bdc(R);
    out.U = Eigen::MatrixXd::Zero(a.rows(), n);
    out.U.topRows(n) = inner.U;
    out.U.applyOnTheLeft(qr.householderQ());
    out.s = std::move(inner.s);
    out.V = std::move(inner.V);
  } else if (a.cols() > 2 * a.rows() && a.rows() > 16) {
    SvdResult t = svd_econ(a.transpose());
    out.U = std::move(t.V);
    out.s = std::move(t.s);
    out.V = std::move(t.U);
  } else {
    out = bdc(a);
  }
  fix_signs(out.U, out.V);
  return out;
}

QrResult qr_thin(const Eigen::MatrixXd& a) {
  if (a.rows() < a.cols())
    throw InputError("qr_thin: needs rows >= cols, got " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()));
  require_finite(a, "qr_thin");
  const Index n = a.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  QrResult out;
  out.Q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), n);
  out.R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (out.R(j, j) < 0.0) {
      out.R.row(j) *= -1.0;
      out.Q.col(j) *= -1.0;
    }
  }
  return out;
}

double default_rank_tolerance(const Eigen::VectorXd& s, Index rows, Index cols) {
  if (s.size() == 0) return 0.0;
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * s.maxCoeff();
}

Index numerical_rank(const Eigen::VectorXd& s, double tol) {
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++r;
  return r;
}

Index numerical_rank(const Eigen::VectorXd& s, Index rows, Index cols) {
  return numerical_rank(s, default_rank_tolerance(s, rows, cols));
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& a, std::optional<double> tol) {
  const SvdResult svd = svd_econ(a);
  const double t = tol.value_or(default_rank_tolerance(svd.s, a.rows(), a.cols()));
  const Index r = numerical_rank(svd.s, t);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.cols(), a.rows());
  if (r == 0) return out;
  out.noalias() = svd.V.leftCols(r) * svd.s.head(r).cwiseInverse().asDiagonal() * svd.U.leftCols(r).transpose();
  return out;
}

double rank_gap(const Eigen::VectorXd& s, Index r) {
  if (r <= 0 || r > s.size()) return 0.0;
  if (r == s.size() || s(r) == 0.0) return std::numeric_limits<double>::infinity();
  return s(r - 1) / s(r);
}

}  // namespace psstn
