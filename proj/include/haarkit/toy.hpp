#pragma once

// Toy trainability demo: classify horizontal- vs vertical-stripe patches
// with {transform-domain layer -> |.| -> global average pool -> linear ->
// cross-entropy}, optimized by per-sample SGD. Deliberately tiny; the point
// is that the layer's parameters receive useful gradients, not benchmark
// accuracy.
//
// The pooling head takes |y| before averaging. A plain average of the
// reconstructed patch collapses to its mean value (only the all-pass
// coefficient survives), which is identical across stripe classes; the
// magnitude makes orientation-selective scaling in the transform domain
// actually pay off in the loss.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "haarkit/layer.hpp"
#include "haarkit/matrix.hpp"
#include "haarkit/rng.hpp"
#include "haarkit/tensor.hpp"

namespace haarkit {

struct ToyDataset {
  int height = 0;
  int width = 0;
  int classes = 0;
  std::vector<Matrix> patches;
  std::vector<int> labels;
};

// n_samples 8x8 patches, alternating labels: even index = horizontal
// stripes, odd = vertical. Stripe amplitude ~ U[0.5, 1), phase in {0, 1},
// plus N(0, 0.1^2) pixel noise. Per sample the stream is consumed in the
// order (amplitude, phase, 64 noise values row-major).
inline ToyDataset make_stripes_dataset(int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("make_stripes_dataset: need n_samples >= 1");
  const int n = 8;
  ToyDataset ds{n, n, 2, {}, {}};
  Xoshiro256StarStar rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    const int label = s % 2;
    const double amp = rng.uniform(0.5, 1.0);
    const auto phase = static_cast<int>(rng.uniform_below(2));
    Matrix patch(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const int k = (label == 0 ? r : c) + phase;
        patch(r, c) = (k % 2 == 0 ? amp : -amp) + 0.1 * rng.normal();
      }
    ds.patches.push_back(std::move(patch));
    ds.labels.push_back(label);
  }
  return ds;
}

struct TraceRow {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct ToyTrainResult {
  std::vector<TraceRow> trace;
  LayerParams params;
  Matrix classifier_w;              // classes x feature matrix
  std::vector<double> classifier_b;
};

// Per-sample SGD over the dataset in index order; the trace records the
// running loss/accuracy of each epoch's pass. Layer parameters come from
// derive_seed(seed, 1), the classifier from derive_seed(seed, 2), so the
// dataset seed can be reused without correlating streams.
inline ToyTrainResult train_toy(const ToyDataset& ds, int epochs, double lr,
                                std::uint64_t seed) {
  if (ds.patches.empty()) throw std::invalid_argument("train_toy: empty dataset");
  if (ds.patches.size() != ds.labels.size()) {
    throw std::invalid_argument("train_toy: patches/labels size mismatch");
  }
  if (epochs < 0) throw std::invalid_argument("train_toy: epochs must be >= 0");
  if (!(lr >= 0.0)) throw std::invalid_argument("train_toy: lr must be >= 0");
  if (ds.classes < 2) throw std::invalid_argument("train_toy: need >= 2 classes");

  const int hp = next_pow2(ds.height);
  const int wp = next_pow2(ds.width);
  const int c_out = 4;
  ToyTrainResult result;
  result.params = init_params<double>(/*paths=*/1, /*c_in=*/1, c_out, hp, wp,
                                      derive_seed(seed, 1));

  Xoshiro256StarStar rng(derive_seed(seed, 2));
  result.classifier_w = Matrix(ds.classes, c_out);
  for (int k = 0; k < ds.classes; ++k)
    for (int o = 0; o < c_out; ++o) result.classifier_w(k, o) = rng.uniform(-0.1, 0.1);
  result.classifier_b.assign(ds.classes, 0.0);

  const int n_samples = static_cast<int>(ds.patches.size());
  const double inv_area = 1.0 / (ds.height * ds.width);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    double loss_sum = 0.0;
    int correct = 0;
    for (int s = 0; s < n_samples; ++s) {
      const Matrix& patch = ds.patches[s];
      const int label = ds.labels[s];
      Tensor4 x(1, 1, ds.height, ds.width);
      for (int r = 0; r < ds.height; ++r)
        for (int c = 0; c < ds.width; ++c) x.at(0, 0, r, c) = patch(r, c);

      ForwardResult fr = forward(x, result.params);
      const Tensor4& y = fr.output;

      std::vector<double> feats(c_out, 0.0);
      for (int o = 0; o < c_out; ++o) {
        double acc = 0.0;
        for (int r = 0; r < ds.height; ++r)
          for (int c = 0; c < ds.width; ++c) acc += std::abs(y.at(0, o, r, c));
        feats[o] = acc * inv_area;
      }

      std::vector<double> logits(ds.classes, 0.0);
      for (int k = 0; k < ds.classes; ++k) {
        double acc = result.classifier_b[k];
        for (int o = 0; o < c_out; ++o) acc += result.classifier_w(k, o) * feats[o];
        logits[k] = acc;
      }
      const double zmax = *std::max_element(logits.begin(), logits.end());
      double denom = 0.0;
      for (double z : logits) denom += std::exp(z - zmax);
      const double log_denom = std::log(denom) + zmax;
      loss_sum += log_denom - logits[label];
      const int pred = static_cast<int>(
          std::max_element(logits.begin(), logits.end()) - logits.begin());
      if (pred == label) ++correct;

      // dL/dlogits = softmax - onehot
      std::vector<double> dlogits(ds.classes);
      for (int k = 0; k < ds.classes; ++k) {
        dlogits[k] = std::exp(logits[k] - log_denom) - (k == label ? 1.0 : 0.0);
      }
      std::vector<double> gfeats(c_out, 0.0);
      for (int k = 0; k < ds.classes; ++k)
        for (int o = 0; o < c_out; ++o)
          gfeats[o] += dlogits[k] * result.classifier_w(k, o);

      Tensor4 gy(1, c_out, ds.height, ds.width);
      for (int o = 0; o < c_out; ++o)
        for (int r = 0; r < ds.height; ++r)
          for (int c = 0; c < ds.width; ++c) {
            const double v = y.at(0, o, r, c);
            const double sgn = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
            gy.at(0, o, r, c) = gfeats[o] * sgn * inv_area;
          }

      LayerGrads grads = backward(gy, fr.cache);

      LayerParams& params = result.params;
      for (int i = 0; i < params.paths; ++i) {
        for (int r = 0; r < params.height; ++r)
          for (int c = 0; c < params.width; ++c) {
            params.scale[i](r, c) -= lr * grads.scale[i](r, c);
            params.threshold_raw[i](r, c) -= lr * grads.threshold_raw[i](r, c);
          }
        for (int o = 0; o < params.c_out; ++o)
          for (int c = 0; c < params.c_in; ++c)
            params.mix[i](o, c) -= lr * grads.mix[i](o, c);
      }
      for (int k = 0; k < ds.classes; ++k) {
        result.classifier_b[k] -= lr * dlogits[k];
        for (int o = 0; o < c_out; ++o)
          result.classifier_w(k, o) -= lr * dlogits[k] * feats[o];
      }
    }
    result.trace.push_back(
        {epoch, loss_sum / n_samples, static_cast<double>(correct) / n_samples});
  }
  return result;
}

}  // namespace haarkit
