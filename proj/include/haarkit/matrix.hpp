#pragma once

// Small dense row-major matrix. Just enough linear algebra for transform
// matrices, oracles, and layer parameters; deliberately not a BLAS.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace haarkit {

template <typename T>
class MatrixT {
 public:
  MatrixT() = default;

  MatrixT(int rows, int cols, T value = T{}) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) {
      throw std::invalid_argument("matrix dimensions must be nonnegative");
    }
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), value);
  }

  static MatrixT identity(int n) {
    MatrixT m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  MatrixT transposed() const {
    MatrixT out(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  MatrixT operator*(const MatrixT& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("matrix product shape mismatch");
    MatrixT out(rows_, rhs.cols_);
    for (int r = 0; r < rows_; ++r) {
      for (int k = 0; k < cols_; ++k) {
        const T a = (*this)(r, k);
        if (a == T{}) continue;
        for (int c = 0; c < rhs.cols_; ++c) out(r, c) += a * rhs(k, c);
      }
    }
    return out;
  }

  bool operator==(const MatrixT& rhs) const {
    return rows_ == rhs.rows_ && cols_ == rhs.cols_ && data_ == rhs.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Matrix = MatrixT<double>;

// Kronecker product, row-major convention: out((i*c+k)*..., ...) = a(i,j)*b(k,l).
template <typename T>
MatrixT<T> kron(const MatrixT<T>& a, const MatrixT<T>& b) {
  MatrixT<T> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const T v = a(i, j);
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = v * b(k, l);
    }
  return out;
}

template <typename T>
T max_abs_diff(const MatrixT<T>& a, const MatrixT<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff shape mismatch");
  }
  T worst{};
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
  return worst;
}

}  // namespace haarkit
