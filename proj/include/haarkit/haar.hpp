#pragma once

// Multilevel 1D/2D Haar transforms plus explicit transform-matrix
// constructors (orthonormal Haar, Walsh-Hadamard, integer add/sub filter
// bank). Coefficient layout is "multilevel packed": for a full-depth
// length-4 transform the output is [a''0, d''0, d'0, d'1] — the deepest
// approximation first, then detail bands from coarsest to finest.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "haarkit/matrix.hpp"

namespace haarkit {

// Transform matrices above 2^20 x 2^20 are refused outright.
inline constexpr int kMaxMatrixLevels = 20;

enum class HaarVariant {
  Orthonormal,    // +-1/sqrt(2) filter taps, energy preserving
  IntegerAddSub,  // (a+b, a-b) taps: integers in, integers out
};

enum class CoefficientOrdering { MultilevelPacked };

inline constexpr bool is_power_of_two(std::size_t n) {
  return n != 0 && (n & (n - 1)) == 0;
}

inline int log2_exact(std::size_t n) {
  int k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

struct HaarPlan {
  std::size_t n = 0;
  int levels = 0;
  HaarVariant variant = HaarVariant::Orthonormal;
  CoefficientOrdering ordering = CoefficientOrdering::MultilevelPacked;

  static HaarPlan make(std::size_t n, int levels,
                       HaarVariant variant = HaarVariant::Orthonormal) {
    if (!is_power_of_two(n) || n < 2) {
      throw std::invalid_argument("HaarPlan: length must be a power of two >= 2, got " +
                                  std::to_string(n));
    }
    const int max_levels = log2_exact(n);
    if (levels < 1 || levels > max_levels) {
      throw std::invalid_argument("HaarPlan: levels must be in [1, " +
                                  std::to_string(max_levels) + "], got " +
                                  std::to_string(levels));
    }
    return HaarPlan{n, levels, variant, CoefficientOrdering::MultilevelPacked};
  }

  static HaarPlan full_depth(std::size_t n,
                             HaarVariant variant = HaarVariant::Orthonormal) {
    if (!is_power_of_two(n) || n < 2) {
      throw std::invalid_argument("HaarPlan: length must be a power of two >= 2, got " +
                                  std::to_string(n));
    }
    return make(n, log2_exact(n), variant);
  }
};

namespace detail {

inline void check_matrix_levels(int level_count, int min_levels) {
  if (level_count < min_levels || level_count > kMaxMatrixLevels) {
    throw std::invalid_argument("transform matrix level count must be in [" +
                                std::to_string(min_levels) + ", " +
                                std::to_string(kMaxMatrixLevels) + "], got " +
                                std::to_string(level_count));
  }
}

}  // namespace detail

// Full-depth orthonormal Haar matrix of size 2^level_count. Built by the
// textbook recursion
//   M_{k+1} = [ M_k (x) (1, 1) ; 2^{k/2} I (x) (1, -1) ],  M_1 = [1 1; 1 -1],
// then row-normalized, so the returned matrix is exactly orthonormal up to
// floating-point rounding.
template <typename Real = double>
MatrixT<Real> haar_matrix(int level_count) {
  detail::check_matrix_levels(level_count, 1);
  MatrixT<Real> m(2, 2);
  m(0, 0) = Real{1};
  m(0, 1) = Real{1};
  m(1, 0) = Real{1};
  m(1, 1) = Real{-1};
  for (int k = 1; k < level_count; ++k) {
    const int size = 1 << k;
    MatrixT<Real> next(2 * size, 2 * size);
    const Real detail_gain = std::pow(Real{2}, Real(k) / Real{2});
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        next(r, 2 * c) = m(r, c);
        next(r, 2 * c + 1) = m(r, c);
      }
    for (int r = 0; r < size; ++r) {
      next(size + r, 2 * r) = detail_gain;
      next(size + r, 2 * r + 1) = -detail_gain;
    }
    m = std::move(next);
  }
  const int n = m.rows();
  for (int r = 0; r < n; ++r) {
    Real norm2{};
    for (int c = 0; c < n; ++c) norm2 += m(r, c) * m(r, c);
    const Real norm = std::sqrt(norm2);
    for (int c = 0; c < n; ++c) m(r, c) /= norm;
  }
  return m;
}

// Walsh-Hadamard matrix of size 2^level_count via the block recursion
// W_{k+1} = [W_k W_k; W_k -W_k]. `normalized` divides by sqrt(2^k), making
// the result orthonormal; for level_count = 1 the normalized matrix is
// bit-identical to haar_matrix(1).
template <typename Real = double>
MatrixT<Real> hadamard_matrix(int level_count, bool normalized = false) {
  detail::check_matrix_levels(level_count, 1);
  MatrixT<Real> m(1, 1, Real{1});
  for (int k = 0; k < level_count; ++k) {
    const int size = m.rows();
    MatrixT<Real> next(2 * size, 2 * size);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        const Real v = m(r, c);
        next(r, c) = v;
        next(r, size + c) = v;
        next(size + r, c) = v;
        next(size + r, size + c) = -v;
      }
    m = std::move(next);
  }
  if (normalized) {
    const Real norm = std::sqrt(std::pow(Real{2}, Real(level_count)));
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m(r, c) /= norm;
  }
  return m;
}

// Analysis matrix of the full-depth integer add/sub filter bank: the Haar
// recursion with every scale factor dropped, so all entries are in
// {-1, 0, +1} and integer inputs give integer coefficients. Rows are
// orthogonal but not orthonormal. Needs at least a 4x4 (level_count >= 2);
// at 2x2 there is no multilevel structure and the plain Hadamard matrix
// already covers it.
template <typename Real = double>
MatrixT<Real> integer_haar_rows(int level_count) {
  detail::check_matrix_levels(level_count, 2);
  MatrixT<Real> m(2, 2);
  m(0, 0) = Real{1};
  m(0, 1) = Real{1};
  m(1, 0) = Real{1};
  m(1, 1) = Real{-1};
  for (int k = 1; k < level_count; ++k) {
    const int size = 1 << k;
    MatrixT<Real> next(2 * size, 2 * size);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        next(r, 2 * c) = m(r, c);
        next(r, 2 * c + 1) = m(r, c);
      }
    for (int r = 0; r < size; ++r) {
      next(size + r, 2 * r) = Real{1};
      next(size + r, 2 * r + 1) = Real{-1};
    }
    m = std::move(next);
  }
  return m;
}

// Exact inverse of integer_haar_rows: W^T diag(1 / ||row_i||^2). Row norms
// of the add/sub bank are powers of two, so every entry is a dyadic
// rational and the inverse is exact in double precision.
template <typename Real = double>
MatrixT<Real> integer_haar_inverse(int level_count) {
  MatrixT<Real> w = integer_haar_rows<Real>(level_count);
  const int n = w.rows();
  MatrixT<Real> inv(n, n);
  for (int r = 0; r < n; ++r) {
    Real norm2{};
    for (int c = 0; c < n; ++c) norm2 += w(r, c) * w(r, c);
    for (int c = 0; c < n; ++c) inv(c, r) = w(r, c) / norm2;
  }
  return inv;
}

// Per-coefficient multipliers mapping IntegerAddSub output onto Orthonormal
// output: a level-l detail coefficient is larger by 2^{l/2}, the final
// approximation band by 2^{levels/2}. (The factor is per band, not global.)
template <typename Real = double>
std::vector<Real> integer_band_scales(const HaarPlan& plan) {
  std::vector<Real> scales(plan.n, Real{1});
  const Real inv_sqrt2 = Real{1} / std::sqrt(Real{2});
  Real band_scale{1};
  std::size_t band_end = plan.n;
  for (int level = 1; level <= plan.levels; ++level) {
    band_scale *= inv_sqrt2;  // = 2^{-level/2}
    const std::size_t band_begin = band_end / 2;
    for (std::size_t i = band_begin; i < band_end; ++i) scales[i] = band_scale;
    band_end = band_begin;
  }
  for (std::size_t i = 0; i < band_end; ++i) scales[i] = band_scale;
  return scales;
}

namespace detail {

template <typename Real>
void dwt_pass(std::span<Real> x, const HaarPlan& plan, std::vector<Real>& scratch) {
  const Real inv_sqrt2 = Real{1} / std::sqrt(Real{2});
  scratch.resize(plan.n);
  for (int level = 0; level < plan.levels; ++level) {
    const std::size_t m = plan.n >> level;
    const std::size_t half = m / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const Real a = x[2 * i];
      const Real b = x[2 * i + 1];
      if (plan.variant == HaarVariant::Orthonormal) {
        scratch[i] = (a + b) * inv_sqrt2;
        scratch[half + i] = (a - b) * inv_sqrt2;
      } else {
        scratch[i] = a + b;
        scratch[half + i] = a - b;
      }
    }
    for (std::size_t i = 0; i < m; ++i) x[i] = scratch[i];
  }
}

template <typename Real>
void idwt_pass(std::span<Real> x, const HaarPlan& plan, std::vector<Real>& scratch) {
  const Real inv_sqrt2 = Real{1} / std::sqrt(Real{2});
  scratch.resize(plan.n);
  for (int level = plan.levels - 1; level >= 0; --level) {
    const std::size_t m = plan.n >> level;
    const std::size_t half = m / 2;
    for (std::size_t i = 0; i < half; ++i) {
      const Real a = x[i];
      const Real d = x[half + i];
      if (plan.variant == HaarVariant::Orthonormal) {
        scratch[2 * i] = (a + d) * inv_sqrt2;
        scratch[2 * i + 1] = (a - d) * inv_sqrt2;
      } else {
        // Exact inverse of (a+b, a-b); halving a dyadic sum is lossless.
        scratch[2 * i] = (a + d) / Real{2};
        scratch[2 * i + 1] = (a - d) / Real{2};
      }
    }
    for (std::size_t i = 0; i < m; ++i) x[i] = scratch[i];
  }
}

template <typename Real>
void check_plan_length(std::size_t got, const HaarPlan& plan, const char* what) {
  if (got != plan.n) {
    throw std::invalid_argument(std::string(what) + ": length " + std::to_string(got) +
                                " does not match plan length " + std::to_string(plan.n));
  }
}

}  // namespace detail

template <typename Real>
void dwt1d_inplace(std::span<Real> x, const HaarPlan& plan) {
  detail::check_plan_length<Real>(x.size(), plan, "dwt1d");
  std::vector<Real> scratch;
  detail::dwt_pass(x, plan, scratch);
}

template <typename Real>
void idwt1d_inplace(std::span<Real> x, const HaarPlan& plan) {
  detail::check_plan_length<Real>(x.size(), plan, "idwt1d");
  std::vector<Real> scratch;
  detail::idwt_pass(x, plan, scratch);
}

template <typename Real>
std::vector<Real> dwt1d(std::span<const Real> x, const HaarPlan& plan) {
  std::vector<Real> out(x.begin(), x.end());
  dwt1d_inplace(std::span<Real>(out), plan);
  return out;
}

template <typename Real>
std::vector<Real> idwt1d(std::span<const Real> coeffs, const HaarPlan& plan) {
  std::vector<Real> out(coeffs.begin(), coeffs.end());
  idwt1d_inplace(std::span<Real>(out), plan);
  return out;
}

// Convenience overloads so callers can pass vectors without spelling spans.
template <typename Real>
std::vector<Real> dwt1d(const std::vector<Real>& x, const HaarPlan& plan) {
  return dwt1d(std::span<const Real>(x), plan);
}

template <typename Real>
std::vector<Real> idwt1d(const std::vector<Real>& coeffs, const HaarPlan& plan) {
  return idwt1d(std::span<const Real>(coeffs), plan);
}

namespace detail {

// Separable 2D transform on a row-major buffer: 1D pass over every row with
// row_plan, then over every column with col_plan. Forward and inverse
// column/row passes commute, so one engine serves both directions.
template <typename Real, typename Pass>
void separable_2d(Real* data, std::size_t rows, std::size_t cols, const HaarPlan& row_plan,
                  const HaarPlan& col_plan, Pass pass) {
  check_plan_length<Real>(cols, row_plan, "dwt2d rows");
  check_plan_length<Real>(rows, col_plan, "dwt2d cols");
  std::vector<Real> scratch;
  for (std::size_t r = 0; r < rows; ++r) {
    pass(std::span<Real>(data + r * cols, cols), row_plan, scratch);
  }
  std::vector<Real> column(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = data[r * cols + c];
    pass(std::span<Real>(column), col_plan, scratch);
    for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] = column[r];
  }
}

}  // namespace detail

template <typename Real>
void dwt2d_inplace(Real* data, std::size_t rows, std::size_t cols, const HaarPlan& row_plan,
                   const HaarPlan& col_plan) {
  detail::separable_2d(data, rows, cols, row_plan, col_plan,
                       [](std::span<Real> x, const HaarPlan& p, std::vector<Real>& s) {
                         detail::dwt_pass(x, p, s);
                       });
}

template <typename Real>
void idwt2d_inplace(Real* data, std::size_t rows, std::size_t cols, const HaarPlan& row_plan,
                    const HaarPlan& col_plan) {
  detail::separable_2d(data, rows, cols, row_plan, col_plan,
                       [](std::span<Real> x, const HaarPlan& p, std::vector<Real>& s) {
                         detail::idwt_pass(x, p, s);
                       });
}

template <typename Real>
MatrixT<Real> dwt2d(const MatrixT<Real>& image, const HaarPlan& plan) {
  if (image.rows() != image.cols()) {
    throw std::invalid_argument("dwt2d single-plan overload requires a square image");
  }
  MatrixT<Real> out = image;
  dwt2d_inplace(out.data(), static_cast<std::size_t>(out.rows()),
                static_cast<std::size_t>(out.cols()), plan, plan);
  return out;
}

template <typename Real>
MatrixT<Real> idwt2d(const MatrixT<Real>& coeffs, const HaarPlan& plan) {
  if (coeffs.rows() != coeffs.cols()) {
    throw std::invalid_argument("idwt2d single-plan overload requires a square image");
  }
  MatrixT<Real> out = coeffs;
  idwt2d_inplace(out.data(), static_cast<std::size_t>(out.rows()),
                 static_cast<std::size_t>(out.cols()), plan, plan);
  return out;
}

template <typename Real>
MatrixT<Real> dwt2d(const MatrixT<Real>& image, const HaarPlan& row_plan,
                    const HaarPlan& col_plan) {
  MatrixT<Real> out = image;
  dwt2d_inplace(out.data(), static_cast<std::size_t>(out.rows()),
                static_cast<std::size_t>(out.cols()), row_plan, col_plan);
  return out;
}

template <typename Real>
MatrixT<Real> idwt2d(const MatrixT<Real>& coeffs, const HaarPlan& row_plan,
                     const HaarPlan& col_plan) {
  MatrixT<Real> out = coeffs;
  idwt2d_inplace(out.data(), static_cast<std::size_t>(out.rows()),
                 static_cast<std::size_t>(out.cols()), row_plan, col_plan);
  return out;
}

}  // namespace haarkit
