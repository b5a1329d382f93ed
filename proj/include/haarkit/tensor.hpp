#pragma once

// Minimal dense rank-4 tensor, row-major (batch, channel, height, width).
// Activations and gradients are all this one type; no views, no strides.

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace haarkit {

template <typename Real>
struct Tensor4T {
  int b = 0, c = 0, h = 0, w = 0;
  std::vector<Real> data;

  Tensor4T() = default;

  Tensor4T(int b_, int c_, int h_, int w_, Real value = Real{})
      : b(b_), c(c_), h(h_), w(w_) {
    if (b_ < 0 || c_ < 0 || h_ < 0 || w_ < 0) {
      throw std::invalid_argument("tensor dimensions must be nonnegative");
    }
    data.assign(static_cast<std::size_t>(b_) * c_ * h_ * w_, value);
  }

  std::size_t size() const { return data.size(); }

  Real& at(int ib, int ic, int ih, int iw) {
    return data[((static_cast<std::size_t>(ib) * c + ic) * h + ih) * w + iw];
  }
  const Real& at(int ib, int ic, int ih, int iw) const {
    return data[((static_cast<std::size_t>(ib) * c + ic) * h + ih) * w + iw];
  }

  // Start of the (ib, ic) plane; planes are contiguous h*w blocks.
  Real* plane(int ib, int ic) {
    return data.data() + (static_cast<std::size_t>(ib) * c + ic) * h * w;
  }
  const Real* plane(int ib, int ic) const {
    return data.data() + (static_cast<std::size_t>(ib) * c + ic) * h * w;
  }

  bool same_shape(const Tensor4T& o) const {
    return b == o.b && c == o.c && h == o.h && w == o.w;
  }
};

using Tensor4 = Tensor4T<double>;

}  // namespace haarkit
