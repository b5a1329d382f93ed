#pragma once

// Transform-domain perceptron layer: per-channel 2D Haar analysis, P
// independent paths of {elementwise scaling, 1x1 channel mixing, soft
// thresholding}, path summation, synthesis back to the pixel domain, and an
// optional residual connection. Forward returns a cache; backward produces
// analytic gradients for the input and every parameter tensor, using the
// fact that the synthesis transform is the adjoint of the analysis one.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "haarkit/haar.hpp"
#include "haarkit/matrix.hpp"
#include "haarkit/rng.hpp"
#include "haarkit/tensor.hpp"

namespace haarkit {

template <typename Real>
Real softplus(Real x) {
  // log(1 + e^x), stable on both tails.
  if (x > Real{0}) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

template <typename Real>
Real softplus_inverse(Real y) {
  if (!(y > Real{0})) throw std::invalid_argument("softplus_inverse needs y > 0");
  // log(e^y - 1); expm1 keeps precision for small y.
  return std::log(std::expm1(y));
}

template <typename Real>
Real logistic(Real x) {
  if (x >= Real{0}) return Real{1} / (Real{1} + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real{1} + e);
}

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

enum class ThresholdMode {
  Softplus,  // effective threshold = softplus(T_raw), trainable, always > 0
  HardZero,  // threshold pinned at exactly 0 (identity checks), not trained
};

template <typename Real>
struct LayerParamsT {
  int paths = 0;
  int c_in = 0;
  int c_out = 0;
  int height = 0;  // padded spatial dims the parameter maps live on
  int width = 0;
  ThresholdMode threshold_mode = ThresholdMode::Softplus;
  bool residual = false;

  std::vector<MatrixT<Real>> scale;          // A_i, height x width, one per path
  std::vector<MatrixT<Real>> mix;            // V_i, c_out x c_in, one per path
  std::vector<MatrixT<Real>> threshold_raw;  // T_raw_i, height x width, one per path

  void validate() const {
    if (paths < 1 || c_in < 1 || c_out < 1 || height < 1 || width < 1) {
      throw std::invalid_argument("layer params: all sizes must be positive");
    }
    if (!is_power_of_two(static_cast<std::size_t>(height)) ||
        !is_power_of_two(static_cast<std::size_t>(width))) {
      throw std::invalid_argument("layer params: height/width must be powers of two");
    }
    const auto np = static_cast<std::size_t>(paths);
    if (scale.size() != np || mix.size() != np || threshold_raw.size() != np) {
      throw std::invalid_argument("layer params: per-path tensor count != paths");
    }
    for (int i = 0; i < paths; ++i) {
      if (scale[i].rows() != height || scale[i].cols() != width ||
          threshold_raw[i].rows() != height || threshold_raw[i].cols() != width ||
          mix[i].rows() != c_out || mix[i].cols() != c_in) {
        throw std::invalid_argument("layer params: per-path tensor shape mismatch");
      }
    }
    if (residual && c_in != c_out) {
      throw std::invalid_argument("layer params: residual requires c_out == c_in");
    }
  }

  MatrixT<Real> effective_threshold(int path) const {
    MatrixT<Real> t(height, width);
    if (threshold_mode == ThresholdMode::Softplus) {
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) t(r, c) = softplus(threshold_raw[path](r, c));
    }
    return t;  // HardZero: all zeros
  }
};

template <typename Real>
struct LayerGradsT {
  std::vector<MatrixT<Real>> scale;          // dL/dA_i
  std::vector<MatrixT<Real>> mix;            // dL/dV_i
  std::vector<MatrixT<Real>> threshold_raw;  // dL/dT_raw_i
  Tensor4T<Real> input;                      // dL/dx
};

using LayerParams = LayerParamsT<double>;
using LayerGrads = LayerGradsT<double>;

struct OrigShape {
  int h = 0;
  int w = 0;
};

template <typename Real>
struct PaddedT {
  Tensor4T<Real> tensor;
  OrigShape orig;
};

// Zero-pad H and W up to the next powers of two; already-padded input is
// copied through unchanged.
template <typename Real>
PaddedT<Real> pad_pow2(const Tensor4T<Real>& x) {
  const int hp = next_pow2(x.h);
  const int wp = next_pow2(x.w);
  PaddedT<Real> out{Tensor4T<Real>(x.b, x.c, hp, wp), {x.h, x.w}};
  for (int b = 0; b < x.b; ++b)
    for (int c = 0; c < x.c; ++c)
      for (int r = 0; r < x.h; ++r)
        for (int cc = 0; cc < x.w; ++cc) out.tensor.at(b, c, r, cc) = x.at(b, c, r, cc);
  return out;
}

// Elementwise sign(z) * max(|z| - T, 0); T is one H x W map broadcast over
// batch and channel.
template <typename Real>
Tensor4T<Real> soft_threshold(const Tensor4T<Real>& z, const MatrixT<Real>& t) {
  if (t.rows() != z.h || t.cols() != z.w) {
    throw std::invalid_argument("soft_threshold: threshold map shape mismatch");
  }
  for (int r = 0; r < t.rows(); ++r)
    for (int c = 0; c < t.cols(); ++c)
      if (t(r, c) < Real{0}) {
        throw std::invalid_argument("soft_threshold: threshold must be nonnegative");
      }
  Tensor4T<Real> out(z.b, z.c, z.h, z.w);
  for (int b = 0; b < z.b; ++b)
    for (int c = 0; c < z.c; ++c)
      for (int r = 0; r < z.h; ++r)
        for (int cc = 0; cc < z.w; ++cc) {
          const Real v = z.at(b, c, r, cc);
          const Real mag = std::abs(v) - t(r, cc);
          out.at(b, c, r, cc) = mag > Real{0} ? (v < Real{0} ? -mag : mag) : Real{0};
        }
  return out;
}

namespace detail {

// Full-depth 2D analysis/synthesis applied to every (batch, channel) plane.
// Degenerate axes of size 1 are passed through; a plane with one axis of
// size 1 is contiguous, so the 1D pass runs on it directly.
template <typename Real>
void transform_planes(Tensor4T<Real>& t, bool inverse) {
  const bool do_rows = t.w >= 2;
  const bool do_cols = t.h >= 2;
  if (!do_rows && !do_cols) return;
  const HaarPlan row_plan =
      do_rows ? HaarPlan::full_depth(static_cast<std::size_t>(t.w)) : HaarPlan{};
  const HaarPlan col_plan =
      do_cols ? HaarPlan::full_depth(static_cast<std::size_t>(t.h)) : HaarPlan{};
  for (int b = 0; b < t.b; ++b)
    for (int c = 0; c < t.c; ++c) {
      Real* plane = t.plane(b, c);
      if (do_rows && do_cols) {
        if (inverse) {
          idwt2d_inplace(plane, static_cast<std::size_t>(t.h),
                         static_cast<std::size_t>(t.w), row_plan, col_plan);
        } else {
          dwt2d_inplace(plane, static_cast<std::size_t>(t.h),
                        static_cast<std::size_t>(t.w), row_plan, col_plan);
        }
      } else {
        // exactly one non-trivial axis; the plane is a contiguous vector
        const HaarPlan& plan = do_rows ? row_plan : col_plan;
        std::span<Real> v(plane, static_cast<std::size_t>(t.h) * t.w);
        if (inverse) {
          idwt1d_inplace(v, plan);
        } else {
          dwt1d_inplace(v, plan);
        }
      }
    }
}

}  // namespace detail

template <typename Real>
struct ForwardCacheT {
  LayerParamsT<Real> params;            // frozen copy; backward reads V_i, A_i from here
  Tensor4T<Real> coeffs;                // X = DWT2(padded x)
  std::vector<Tensor4T<Real>> scaled;   // X ∘ A_i per path
  std::vector<Tensor4T<Real>> mixed;    // Z_i = V_i(X ∘ A_i) per path
  OrigShape orig;                       // pre-padding spatial shape
};

template <typename Real>
struct ForwardResultT {
  Tensor4T<Real> output;
  ForwardCacheT<Real> cache;
};

using ForwardCache = ForwardCacheT<double>;
using ForwardResult = ForwardResultT<double>;

template <typename Real>
ForwardResultT<Real> forward(const Tensor4T<Real>& x, const LayerParamsT<Real>& params) {
  params.validate();
  if (x.b < 1 || x.c < 1 || x.h < 1 || x.w < 1) {
    throw std::invalid_argument("forward: input dimensions must be positive");
  }
  if (x.c != params.c_in) {
    throw std::invalid_argument("forward: input channels " + std::to_string(x.c) +
                                " != params c_in " + std::to_string(params.c_in));
  }
  PaddedT<Real> padded = pad_pow2(x);
  if (padded.tensor.h != params.height || padded.tensor.w != params.width) {
    throw std::invalid_argument("forward: padded input is " +
                                std::to_string(padded.tensor.h) + "x" +
                                std::to_string(padded.tensor.w) +
                                " but params expect " + std::to_string(params.height) +
                                "x" + std::to_string(params.width));
  }

  ForwardCacheT<Real> cache;
  cache.params = params;
  cache.orig = padded.orig;
  cache.coeffs = std::move(padded.tensor);
  detail::transform_planes(cache.coeffs, /*inverse=*/false);

  const int hp = params.height;
  const int wp = params.width;
  Tensor4T<Real> path_sum(x.b, params.c_out, hp, wp);
  cache.scaled.reserve(params.paths);
  cache.mixed.reserve(params.paths);
  for (int i = 0; i < params.paths; ++i) {
    const MatrixT<Real>& a = params.scale[i];
    Tensor4T<Real> xa(x.b, params.c_in, hp, wp);
    for (int b = 0; b < x.b; ++b)
      for (int c = 0; c < params.c_in; ++c)
        for (int r = 0; r < hp; ++r)
          for (int cc = 0; cc < wp; ++cc)
            xa.at(b, c, r, cc) = cache.coeffs.at(b, c, r, cc) * a(r, cc);

    const MatrixT<Real>& v = params.mix[i];
    Tensor4T<Real> z(x.b, params.c_out, hp, wp);
    for (int b = 0; b < x.b; ++b)
      for (int o = 0; o < params.c_out; ++o)
        for (int c = 0; c < params.c_in; ++c) {
          const Real vw = v(o, c);
          if (vw == Real{}) continue;
          const Real* src = xa.plane(b, c);
          Real* dst = z.plane(b, o);
          for (int p = 0; p < hp * wp; ++p) dst[p] += vw * src[p];
        }

    Tensor4T<Real> s = soft_threshold(z, params.effective_threshold(i));
    for (std::size_t p = 0; p < path_sum.size(); ++p) path_sum.data[p] += s.data[p];

    cache.scaled.push_back(std::move(xa));
    cache.mixed.push_back(std::move(z));
  }

  detail::transform_planes(path_sum, /*inverse=*/true);

  Tensor4T<Real> y(x.b, params.c_out, x.h, x.w);
  for (int b = 0; b < x.b; ++b)
    for (int o = 0; o < params.c_out; ++o)
      for (int r = 0; r < x.h; ++r)
        for (int cc = 0; cc < x.w; ++cc) y.at(b, o, r, cc) = path_sum.at(b, o, r, cc);
  if (params.residual) {
    for (std::size_t p = 0; p < y.size(); ++p) y.data[p] += x.data[p];
  }
  return {std::move(y), std::move(cache)};
}

template <typename Real>
LayerGradsT<Real> backward(const Tensor4T<Real>& grad_out, const ForwardCacheT<Real>& cache) {
  const LayerParamsT<Real>& params = cache.params;
  params.validate();
  const int hp = params.height;
  const int wp = params.width;
  if (cache.coeffs.h != hp || cache.coeffs.w != wp || cache.coeffs.c != params.c_in ||
      static_cast<int>(cache.scaled.size()) != params.paths ||
      static_cast<int>(cache.mixed.size()) != params.paths) {
    throw std::invalid_argument("backward: cache does not match its parameters");
  }
  if (grad_out.b != cache.coeffs.b || grad_out.c != params.c_out ||
      grad_out.h != cache.orig.h || grad_out.w != cache.orig.w) {
    throw std::invalid_argument("backward: grad_out shape does not match forward output");
  }

  const int batch = grad_out.b;

  // Adjoint of crop is zero-extension; adjoint of synthesis is analysis.
  Tensor4T<Real> gy(batch, params.c_out, hp, wp);
  for (int b = 0; b < batch; ++b)
    for (int o = 0; o < params.c_out; ++o)
      for (int r = 0; r < grad_out.h; ++r)
        for (int cc = 0; cc < grad_out.w; ++cc)
          gy.at(b, o, r, cc) = grad_out.at(b, o, r, cc);
  detail::transform_planes(gy, /*inverse=*/false);

  LayerGradsT<Real> grads;
  grads.scale.assign(params.paths, MatrixT<Real>(hp, wp));
  grads.mix.assign(params.paths, MatrixT<Real>(params.c_out, params.c_in));
  grads.threshold_raw.assign(params.paths, MatrixT<Real>(hp, wp));

  Tensor4T<Real> gx_coeffs(batch, params.c_in, hp, wp);  // dL/dX accumulated over paths

  for (int i = 0; i < params.paths; ++i) {
    const MatrixT<Real> t = params.effective_threshold(i);
    const Tensor4T<Real>& z = cache.mixed[i];
    const Tensor4T<Real>& xa = cache.scaled[i];

    // Soft-threshold backward: pass-through where |z| > T, dead elsewhere
    // (the kink itself gets subgradient 0). dS/dT = -sign(z) on live cells.
    Tensor4T<Real> gz(batch, params.c_out, hp, wp);
    MatrixT<Real>& g_t_raw = grads.threshold_raw[i];
    for (int b = 0; b < batch; ++b)
      for (int o = 0; o < params.c_out; ++o)
        for (int r = 0; r < hp; ++r)
          for (int cc = 0; cc < wp; ++cc) {
            const Real zv = z.at(b, o, r, cc);
            if (std::abs(zv) > t(r, cc)) {
              const Real g = gy.at(b, o, r, cc);
              gz.at(b, o, r, cc) = g;
              g_t_raw(r, cc) -= (zv < Real{0} ? Real{-1} : Real{1}) * g;
            }
          }
    if (params.threshold_mode == ThresholdMode::Softplus) {
      for (int r = 0; r < hp; ++r)
        for (int cc = 0; cc < wp; ++cc)
          g_t_raw(r, cc) *= logistic(params.threshold_raw[i](r, cc));
    } else {
      g_t_raw = MatrixT<Real>(hp, wp);  // threshold pinned at zero: no gradient
    }

    // Channel mixing backward.
    MatrixT<Real>& gv = grads.mix[i];
    const MatrixT<Real>& v = params.mix[i];
    Tensor4T<Real> gxa(batch, params.c_in, hp, wp);
    for (int b = 0; b < batch; ++b)
      for (int o = 0; o < params.c_out; ++o) {
        const Real* gz_plane = gz.plane(b, o);
        for (int c = 0; c < params.c_in; ++c) {
          const Real* xa_plane = xa.plane(b, c);
          Real* gxa_plane = gxa.plane(b, c);
          const Real vw = v(o, c);
          Real acc{};
          for (int p = 0; p < hp * wp; ++p) {
            acc += gz_plane[p] * xa_plane[p];
            gxa_plane[p] += vw * gz_plane[p];
          }
          gv(o, c) += acc;
        }
      }

    // Scaling backward.
    MatrixT<Real>& ga = grads.scale[i];
    const MatrixT<Real>& a = params.scale[i];
    for (int b = 0; b < batch; ++b)
      for (int c = 0; c < params.c_in; ++c)
        for (int r = 0; r < hp; ++r)
          for (int cc = 0; cc < wp; ++cc) {
            const Real g = gxa.at(b, c, r, cc);
            ga(r, cc) += g * cache.coeffs.at(b, c, r, cc);
            gx_coeffs.at(b, c, r, cc) += g * a(r, cc);
          }
  }

  // Adjoint of analysis is synthesis; then crop back to the input shape.
  detail::transform_planes(gx_coeffs, /*inverse=*/true);
  grads.input = Tensor4T<Real>(batch, params.c_in, cache.orig.h, cache.orig.w);
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < params.c_in; ++c)
      for (int r = 0; r < cache.orig.h; ++r)
        for (int cc = 0; cc < cache.orig.w; ++cc)
          grads.input.at(b, c, r, cc) = gx_coeffs.at(b, c, r, cc);
  if (params.residual) {
    for (std::size_t p = 0; p < grads.input.size(); ++p)
      grads.input.data[p] += grad_out.data[p];
  }
  return grads;
}

// A_i all ones, V_i uniform in (-sqrt(1/c_in), sqrt(1/c_in)) drawn row-major
// path by path, T_raw_i constant with softplus(T_raw) = 0.01.
template <typename Real>
LayerParamsT<Real> init_params(int paths, int c_in, int c_out, int height, int width,
                               std::uint64_t seed) {
  LayerParamsT<Real> params;
  params.paths = paths;
  params.c_in = c_in;
  params.c_out = c_out;
  params.height = height;
  params.width = width;
  const Real bound = std::sqrt(Real{1} / Real(c_in > 0 ? c_in : 1));
  const Real t_raw = softplus_inverse(Real{0.01});
  Xoshiro256StarStar rng(seed);
  for (int i = 0; i < paths; ++i) {
    params.scale.emplace_back(height, width, Real{1});
    MatrixT<Real> v(c_out, c_in);
    for (int r = 0; r < c_out; ++r)
      for (int c = 0; c < c_in; ++c)
        v(r, c) = static_cast<Real>(rng.uniform(-bound, bound));
    params.mix.push_back(std::move(v));
    params.threshold_raw.emplace_back(height, width, t_raw);
  }
  params.validate();
  return params;
}

}  // namespace haarkit
