#pragma once

// Dense tensors, tensor-train matrices (matrix product operators) and the
// elementary multilinear products used throughout the library.
//
// Every linearization is column-major: for dims (n1, n2, ..., nd) the entry
// (i1, ..., id) lives at i1 + n1*(i2 + n2*(i3 + ...)). Matrix row and column
// indices of a tensor-train matrix are grouped the same way, first core
// fastest.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "psstn/config.hpp"
#include "psstn/errors.hpp"

namespace psstn {

using Index = Eigen::Index;
using Dims = std::vector<Index>;

namespace detail {

inline std::string format_dims(std::span<const Index> dims) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < dims.size(); ++k) os << (k ? "," : "") << dims[k];
  os << ')';
  return os.str();
}

inline Index product(std::span<const Index> dims) {
  Index p = 1;
  for (Index v : dims) p *= v;
  return p;
}

/// Product that saturates at uint64 max instead of overflowing.
inline std::uint64_t saturating_product(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

/// Splits a grouped (column-major) index into its components.
inline std::vector<Index> split_index(Index flat, std::span<const Index> dims) {
  std::vector<Index> out(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    out[k] = flat % dims[k];
    flat /= dims[k];
  }
  return out;
}

}  // namespace detail

/// A real d-way array stored column-major.
template <typename Scalar>
class DenseTensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;

  DenseTensor() = default;

  /// Zero-filled tensor.
  explicit DenseTensor(Dims dims) : dims_(checked(std::move(dims))) {
    data_ = Vector::Zero(detail::product(dims_));
  }

  DenseTensor(Dims dims, Vector data) : dims_(checked(std::move(dims))), data_(std::move(data)) {
    if (data_.size() != detail::product(dims_))
      throw DimensionMismatch("tensor data length " + std::to_string(data_.size()) +
                              " does not match dims " + detail::format_dims(dims_));
  }

  /// Reinterprets a matrix (column-major) as a tensor with the given dims.
  template <typename Derived>
  static DenseTensor from_matrix(const Eigen::MatrixBase<Derived>& m, Dims dims) {
    Matrix tmp = m;
    return DenseTensor(std::move(dims), Eigen::Map<const Vector>(tmp.data(), tmp.size()));
  }

  const Dims& dims() const { return dims_; }
  Index dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t order() const { return dims_.size(); }
  Index size() const { return data_.size(); }

  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  Index linear_index(std::span<const Index> idx) const {
    if (idx.size() != dims_.size())
      throw DimensionMismatch("expected " + std::to_string(dims_.size()) + " indices, got " +
                              std::to_string(idx.size()));
    Index offset = 0;
    Index stride = 1;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= dims_[k])
        throw InputError("index " + std::to_string(idx[k]) + " out of bounds on axis " +
                         std::to_string(k) + " (extent " + std::to_string(dims_[k]) + ")");
      offset += idx[k] * stride;
      stride *= dims_[k];
    }
    return offset;
  }

  template <typename... I>
  Scalar& operator()(I... idx) {
    const Index list[] = {static_cast<Index>(idx)...};
    return data_[linear_index(list)];
  }

  template <typename... I>
  const Scalar& operator()(I... idx) const {
    const Index list[] = {static_cast<Index>(idx)...};
    return data_[linear_index(list)];
  }

  DenseTensor reshaped(Dims new_dims) const { return DenseTensor(std::move(new_dims), data_); }

  /// MATLAB-style permute: axis k of the result is axis perm[k] of *this.
  DenseTensor permuted(std::span<const std::size_t> perm) const {
    const std::size_t d = dims_.size();
    if (perm.size() != d) throw DimensionMismatch("permutation length does not match tensor order");
    std::vector<bool> seen(d, false);
    for (std::size_t p : perm) {
      if (p >= d || seen[p]) throw InputError("invalid permutation");
      seen[p] = true;
    }
    std::vector<Index> src_stride(d);
    Index s = 1;
    for (std::size_t k = 0; k < d; ++k) {
      src_stride[k] = s;
      s *= dims_[k];
    }
    Dims out_dims(d);
    std::vector<Index> stride(d);
    for (std::size_t k = 0; k < d; ++k) {
      out_dims[k] = dims_[perm[k]];
      stride[k] = src_stride[perm[k]];
    }
    DenseTensor out(out_dims);
    if (out.size() == 0) return out;
    std::vector<Index> counter(d, 0);
    Index src = 0;
    const Index inner = d ? out_dims[0] : 1;
    const Index inner_stride = d ? stride[0] : 1;
    Scalar* dst = out.data_.data();
    const Scalar* in = data_.data();
    for (Index lin = 0; lin < out.size(); lin += inner) {
      for (Index i = 0; i < inner; ++i) dst[lin + i] = in[src + i * inner_stride];
      for (std::size_t k = 1; k < d; ++k) {
        src += stride[k];
        if (++counter[k] < out_dims[k]) break;
        src -= stride[k] * out_dims[k];
        counter[k] = 0;
      }
    }
    return out;
  }

  DenseTensor permuted(std::initializer_list<std::size_t> perm) const {
    std::vector<std::size_t> p(perm);
    return permuted(std::span<const std::size_t>(p));
  }

  /// Column-major reshape into a rows x (size/rows) matrix, without copying.
  ConstMatrixMap unfold(Index rows) const {
    check_unfold(rows);
    return ConstMatrixMap(data_.data(), rows, rows ? size() / rows : 0);
  }

  MatrixMap unfold(Index rows) {
    check_unfold(rows);
    return MatrixMap(data_.data(), rows, rows ? size() / rows : 0);
  }

 private:
  static Dims checked(Dims dims) {
    for (Index v : dims)
      if (v <= 0) throw InputError("tensor dims must be positive, got " + detail::format_dims(dims));
    return dims;
  }

  void check_unfold(Index rows) const {
    if (rows <= 0 || size() % rows != 0)
      throw DimensionMismatch("cannot unfold tensor " + detail::format_dims(dims_) + " into " +
                              std::to_string(rows) + " rows");
  }

  Dims dims_;
  Vector data_;
};

/// k-mode product: contracts axis `axis` of `t` with the columns of `u`.
template <typename Scalar, typename Derived>
DenseTensor<Scalar> mode_product(const DenseTensor<Scalar>& t, const Eigen::MatrixBase<Derived>& u,
                                 std::size_t axis) {
  using Matrix = typename DenseTensor<Scalar>::Matrix;
  if (axis >= t.order()) throw DimensionMismatch("mode product axis out of range");
  if (u.cols() != t.dim(axis))
    throw DimensionMismatch("mode product: matrix has " + std::to_string(u.cols()) +
                            " columns but axis " + std::to_string(axis) + " has extent " +
                            std::to_string(t.dim(axis)));
  Dims out_dims = t.dims();
  out_dims[axis] = u.rows();
  DenseTensor<Scalar> out(out_dims);
  const Index left = detail::product(std::span<const Index>(t.dims()).first(axis));
  const Index n = t.dim(axis);
  const Index right = t.size() / (left * n);
  const Index p = u.rows();
  const Matrix um = u;
  if (left == 1) {
    out.unfold(p) = um * t.unfold(n);
    return out;
  }
  const Matrix ut = um.transpose();
  for (Index r = 0; r < right; ++r) {
    Eigen::Map<const Matrix> src(t.data().data() + r * left * n, left, n);
    Eigen::Map<Matrix> dst(out.data().data() + r * left * p, left, p);
    dst.noalias() = src * ut;
  }
  return out;
}

/// Kronecker product with the block layout a(i,j) * b.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                               a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Column-wise Kronecker product.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> khatri_rao(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.cols() != b.cols())
    throw DimensionMismatch("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                            " vs " + std::to_string(b.cols()) + ")");
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                               a.cols());
  for (Index k = 0; k < a.cols(); ++k)
    for (Index i = 0; i < a.rows(); ++i)
      out.col(k).segment(i * b.rows(), b.rows()) = a(i, k) * b.col(k);
  return out;
}

/// u (x) u (x) ... (x) u with d factors.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> repeated_kron(
    const Eigen::MatrixBase<Derived>& u, int d) {
  if (d < 1) throw InputError("repeated_kron: degree must be at least 1");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out = u;
  for (int k = 1; k < d; ++k) out = kron(out, u);
  return out;
}

/// A matrix stored as a chain of 4-way cores (r_k, n_k, m_k, r_{k+1}) with
/// r_1 = r_{d+1} = 1. Row dims are n_1..n_d and column dims m_1..m_d.
template <typename Scalar>
class TensorTrainMatrix {
 public:
  using Core = DenseTensor<Scalar>;
  using Matrix = typename Core::Matrix;

  TensorTrainMatrix() = default;

  explicit TensorTrainMatrix(std::vector<Core> cores) : cores_(std::move(cores)) { validate(); }

  std::size_t num_cores() const { return cores_.size(); }
  const Core& core(std::size_t k) const { return cores_.at(k); }
  const std::vector<Core>& cores() const { return cores_; }

  /// r_1, ..., r_{d+1}.
  std::vector<Index> ranks() const {
    std::vector<Index> r;
    r.reserve(cores_.size() + 1);
    for (const auto& c : cores_) r.push_back(c.dim(0));
    r.push_back(cores_.empty() ? 1 : cores_.back().dim(3));
    return r;
  }

  Dims row_dims() const {
    Dims out;
    for (const auto& c : cores_) out.push_back(c.dim(1));
    return out;
  }

  Dims col_dims() const {
    Dims out;
    for (const auto& c : cores_) out.push_back(c.dim(2));
    return out;
  }

  Index rows() const { return detail::product(row_dims()); }
  Index cols() const { return detail::product(col_dims()); }

  /// Entry at multi-indices (i_1..i_d), (j_1..j_d), contracted left to right.
  Scalar entry(std::span<const Index> row_idx, std::span<const Index> col_idx) const {
    const std::size_t d = cores_.size();
    if (row_idx.size() != d || col_idx.size() != d)
      throw DimensionMismatch("entry: expected " + std::to_string(d) + " row and column indices");
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> v = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Ones(1);
    for (std::size_t k = 0; k < d; ++k) {
      const Core& c = cores_[k];
      if (row_idx[k] < 0 || row_idx[k] >= c.dim(1))
        throw InputError("entry: row index out of bounds on axis " + std::to_string(k));
      if (col_idx[k] < 0 || col_idx[k] >= c.dim(2))
        throw InputError("entry: column index out of bounds on axis " + std::to_string(k));
      const Index r0 = c.dim(0), r1 = c.dim(3);
      Eigen::Matrix<Scalar, 1, Eigen::Dynamic> next = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(r1);
      for (Index b = 0; b < r1; ++b)
        for (Index a = 0; a < r0; ++a) next(b) += v(a) * c(a, row_idx[k], col_idx[k], b);
      v = std::move(next);
    }
    return v(0);
  }

  /// Entry at grouped (flat) row and column indices.
  Scalar entry_at(Index row, Index col) const {
    if (row < 0 || row >= rows()) throw InputError("entry_at: row index out of bounds");
    if (col < 0 || col >= cols()) throw InputError("entry_at: column index out of bounds");
    const auto ri = detail::split_index(row, row_dims());
    const auto ci = detail::split_index(col, col_dims());
    return entry(ri, ci);
  }

  TensorTrainMatrix with_core(std::size_t k, Core core) const {
    std::vector<Core> cores = cores_;
    cores.at(k) = std::move(core);
    return TensorTrainMatrix(std::move(cores));
  }

 private:
  void validate() const {
    if (cores_.empty()) throw InputError("tensor-train matrix needs at least one core");
    for (std::size_t k = 0; k < cores_.size(); ++k) {
      if (cores_[k].order() != 4)
        throw DimensionMismatch("core " + std::to_string(k) + " is not 4-way");
      if (k + 1 < cores_.size() && cores_[k].dim(3) != cores_[k + 1].dim(0))
        throw DimensionMismatch("rank chain broken between cores " + std::to_string(k) + " and " +
                                std::to_string(k + 1) + ": " + detail::format_dims(cores_[k].dims()) +
                                " then " + detail::format_dims(cores_[k + 1].dims()));
    }
    if (cores_.front().dim(0) != 1 || cores_.back().dim(3) != 1)
      throw DimensionMismatch("boundary ranks must be 1");
  }

  std::vector<Core> cores_;
};

using Tensor = DenseTensor<double>;
using Mpo = TensorTrainMatrix<double>;

/// Dense reconstruction of a tensor-train matrix. Refuses when rows*cols
/// exceeds `guard`.
template <typename Scalar>
typename TensorTrainMatrix<Scalar>::Matrix to_dense(const TensorTrainMatrix<Scalar>& tn,
                                                    std::uint64_t guard = dense_guard()) {
  using Matrix = typename TensorTrainMatrix<Scalar>::Matrix;
  const auto entries = detail::saturating_product(static_cast<std::uint64_t>(tn.rows()),
                                                  static_cast<std::uint64_t>(tn.cols()));
  if (entries > guard)
    throw SizeGuardError("dense reconstruction of a " + std::to_string(tn.rows()) + "x" +
                         std::to_string(tn.cols()) + " matrix exceeds the dense guard of " +
                         std::to_string(guard) + " entries");
  // partial holds (rows so far, cols so far, rank)
  DenseTensor<Scalar> partial(Dims{1, 1, 1});
  partial.data()(0) = Scalar(1);
  for (const auto& core : tn.cores()) {
    const Index R = partial.dim(0), C = partial.dim(1), r = partial.dim(2);
    const Index n = core.dim(1), m = core.dim(2), r1 = core.dim(3);
    DenseTensor<Scalar> tmp(Dims{R, C, n, m, r1});
    tmp.unfold(R * C).noalias() = partial.unfold(R * C) * core.unfold(r);
    partial = tmp.permuted({0, 2, 1, 3, 4}).reshaped(Dims{R * n, C * m, r1});
  }
  return Matrix(partial.unfold(partial.dim(0)));
}

/// Transpose: swaps the row and column axes of every core.
template <typename Scalar>
TensorTrainMatrix<Scalar> transpose(const TensorTrainMatrix<Scalar>& tn) {
  std::vector<DenseTensor<Scalar>> cores;
  cores.reserve(tn.num_cores());
  for (const auto& c : tn.cores()) cores.push_back(c.permuted({0, 2, 1, 3}));
  return TensorTrainMatrix<Scalar>(std::move(cores));
}

/// Matrix product a * b computed core by core; ranks multiply.
template <typename Scalar>
TensorTrainMatrix<Scalar> multiply(const TensorTrainMatrix<Scalar>& a, const TensorTrainMatrix<Scalar>& b) {
  if (a.num_cores() != b.num_cores())
    throw DimensionMismatch("multiply: core counts differ");
  if (a.col_dims() != b.row_dims())
    throw DimensionMismatch("multiply: column dims " + detail::format_dims(a.col_dims()) +
                            " do not match row dims " + detail::format_dims(b.row_dims()));
  std::vector<DenseTensor<Scalar>> cores;
  cores.reserve(a.num_cores());
  for (std::size_t k = 0; k < a.num_cores(); ++k) {
    const auto& ca = a.core(k);
    const auto& cb = b.core(k);
    const Index ra = ca.dim(0), n = ca.dim(1), l = ca.dim(2), ra1 = ca.dim(3);
    const Index rb = cb.dim(0), q = cb.dim(2), rb1 = cb.dim(3);
    const auto pa = ca.permuted({0, 1, 3, 2});  // (ra, n, ra1, l)
    const auto pb = cb.permuted({1, 0, 2, 3});  // (l, rb, q, rb1)
    DenseTensor<Scalar> prod(Dims{ra, n, ra1, rb, q, rb1});
    prod.unfold(ra * n * ra1).noalias() = pa.unfold(ra * n * ra1) * pb.unfold(l);
    cores.push_back(prod.permuted({0, 3, 1, 4, 2, 5}).reshaped(Dims{ra * rb, n, q, ra1 * rb1}));
  }
  return TensorTrainMatrix<Scalar>(std::move(cores));
}

/// Upper bounds min(prod_{i<k} n_i m_i, prod_{i>=k} n_i m_i) on the canonical
/// ranks r_2..r_d of any tensor-train matrix with these dims.
inline std::vector<std::uint64_t> mpo_rank_bounds(std::span<const Index> row_dims,
                                                  std::span<const Index> col_dims) {
  if (row_dims.size() != col_dims.size())
    throw DimensionMismatch("mpo_rank_bounds: row and column dim lists differ in length");
  const std::size_t d = row_dims.size();
  std::vector<std::uint64_t> bounds;
  for (std::size_t k = 1; k < d; ++k) {
    std::uint64_t left = 1, right = 1;
    for (std::size_t i = 0; i < k; ++i)
      left = detail::saturating_product(left, static_cast<std::uint64_t>(row_dims[i] * col_dims[i]));
    for (std::size_t i = k; i < d; ++i)
      right = detail::saturating_product(right, static_cast<std::uint64_t>(row_dims[i] * col_dims[i]));
    bounds.push_back(std::min(left, right));
  }
  return bounds;
}

/// True when every interior rank of `tn` respects mpo_rank_bounds.
template <typename Scalar>
bool within_rank_bounds(const TensorTrainMatrix<Scalar>& tn) {
  const Dims rd = tn.row_dims(), cd = tn.col_dims();
  const auto bounds = mpo_rank_bounds(rd, cd);
  const auto r = tn.ranks();
  for (std::size_t k = 0; k < bounds.size(); ++k)
    if (static_cast<std::uint64_t>(r[k + 1]) > bounds[k]) return false;
  return true;
}

}  // namespace psstn
