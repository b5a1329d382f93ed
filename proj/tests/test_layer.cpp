#include <cmath>
#include <cstdint>
#include <vector>

#include "catch_amalgamated.hpp"

#include "haarkit/haar.hpp"
#include "haarkit/io.hpp"
#include "haarkit/layer.hpp"
#include "haarkit/matrix.hpp"
#include "haarkit/rng.hpp"
#include "haarkit/tensor.hpp"
#include "layer_reference.hpp"

using haarkit::LayerParams;
using haarkit::Matrix;
using haarkit::Tensor4;
using haarkit::ThresholdMode;
using layerref::random_params;
using layerref::random_tensor;
using layerref::reference_forward;
using layerref::tensor_max_diff;

TEST_CASE("pad_pow2 pads up to powers of two") {
  haarkit::Xoshiro256StarStar rng(0x9f);
  Tensor4 x = random_tensor(1, 1, 3, 3, rng);
  const auto padded = haarkit::pad_pow2(x);
  REQUIRE(padded.tensor.h == 4);
  REQUIRE(padded.tensor.w == 4);
  REQUIRE(padded.orig.h == 3);
  REQUIRE(padded.orig.w == 3);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const double expect = (r < 3 && c < 3) ? x.at(0, 0, r, c) : 0.0;
      REQUIRE(padded.tensor.at(0, 0, r, c) == expect);
    }

  Tensor4 already = random_tensor(1, 1, 4, 4, rng);
  const auto same = haarkit::pad_pow2(already);
  REQUIRE(same.tensor.data == already.data);

  Tensor4 rect = random_tensor(2, 3, 5, 6, rng);
  const auto padded_rect = haarkit::pad_pow2(rect);
  REQUIRE(padded_rect.tensor.h == 8);
  REQUIRE(padded_rect.tensor.w == 8);
  REQUIRE(padded_rect.tensor.b == 2);
  REQUIRE(padded_rect.tensor.c == 3);
}

TEST_CASE("soft_threshold worked examples and properties") {
  Tensor4 z(1, 1, 1, 3);
  z.at(0, 0, 0, 0) = 2.0;
  z.at(0, 0, 0, 1) = -2.0;
  z.at(0, 0, 0, 2) = 0.3;
  const Matrix t(1, 3, 0.5);
  const Tensor4 s = haarkit::soft_threshold(z, t);
  REQUIRE(s.at(0, 0, 0, 0) == 1.5);
  REQUIRE(s.at(0, 0, 0, 1) == -1.5);
  REQUIRE(s.at(0, 0, 0, 2) == 0.0);

  Matrix bad(1, 3, 0.5);
  bad(0, 1) = -0.1;
  REQUIRE_THROWS_AS(haarkit::soft_threshold(z, bad), std::invalid_argument);
  REQUIRE_THROWS_AS(haarkit::soft_threshold(z, Matrix(2, 2, 0.5)), std::invalid_argument);

  haarkit::Xoshiro256StarStar rng(0x50f7);
  Tensor4 zr = random_tensor(2, 3, 4, 4, rng);
  Matrix tr(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) tr(r, c) = rng.uniform(0.0, 0.8);
  const Tensor4 sr = haarkit::soft_threshold(zr, tr);
  for (std::size_t i = 0; i < sr.size(); ++i) {
    REQUIRE(std::abs(sr.data[i]) <= std::abs(zr.data[i]));
    if (sr.data[i] != 0.0) {
      REQUIRE(std::signbit(sr.data[i]) == std::signbit(zr.data[i]));
    }
  }
}

TEST_CASE("forward identity configuration reproduces the input") {
  LayerParams p;
  p.paths = 1;
  p.c_in = 2;
  p.c_out = 2;
  p.height = 4;
  p.width = 4;
  p.threshold_mode = ThresholdMode::HardZero;
  p.scale.emplace_back(4, 4, 1.0);
  p.mix.push_back(Matrix::identity(2));
  p.threshold_raw.emplace_back(4, 4, 0.0);

  haarkit::Xoshiro256StarStar rng(0x1d);
  const Tensor4 x = random_tensor(3, 2, 4, 4, rng);
  const auto result = haarkit::forward(x, p);
  REQUIRE(tensor_max_diff(result.output, x) < 1e-10);
}

TEST_CASE("forward zero path with residual passes the input through") {
  LayerParams p;
  p.paths = 1;
  p.c_in = 2;
  p.c_out = 2;
  p.height = 4;
  p.width = 4;
  p.residual = true;
  p.scale.emplace_back(4, 4, 0.0);  // path contributes nothing
  Matrix v(2, 2);
  v(0, 0) = 0.7;
  v(1, 0) = -0.3;
  v(0, 1) = 0.2;
  v(1, 1) = 1.1;
  p.mix.push_back(v);
  p.threshold_raw.emplace_back(4, 4, -2.0);

  haarkit::Xoshiro256StarStar rng(0x2e);
  const Tensor4 x = random_tensor(2, 2, 4, 4, rng);
  const auto result = haarkit::forward(x, p);
  REQUIRE(result.output.data == x.data);
}

TEST_CASE("forward matches the dense literal reference on random configurations") {
  haarkit::Xoshiro256StarStar rng(0xacc0);
  const int path_choices[] = {1, 2, 3};
  const int channel_choices[] = {1, 2, 4};
  const int size_choices[] = {4, 8};
  int configs = 0;
  while (configs < 50) {
    const int paths = path_choices[rng.uniform_below(3)];
    const int c_in = channel_choices[rng.uniform_below(3)];
    const int c_out = channel_choices[rng.uniform_below(3)];
    const int n = size_choices[rng.uniform_below(2)];
    const bool residual = c_in == c_out && rng.uniform() < 0.3;
    LayerParams p = random_params(paths, c_in, c_out, n, n, rng, residual);
    const Tensor4 x = random_tensor(2, c_in, n, n, rng);
    const auto result = haarkit::forward(x, p);
    const Tensor4 expect = reference_forward(x, p);
    REQUIRE(tensor_max_diff(result.output, expect) < 1e-10);
    ++configs;
  }
}

TEST_CASE("residual additivity is exact") {
  haarkit::Xoshiro256StarStar rng(0xadd);
  LayerParams p = random_params(2, 3, 3, 4, 4, rng, /*residual=*/true);
  const Tensor4 x = random_tensor(2, 3, 4, 4, rng);
  const Tensor4 with_res = haarkit::forward(x, p).output;
  p.residual = false;
  const Tensor4 without = haarkit::forward(x, p).output;
  for (std::size_t i = 0; i < x.size(); ++i) {
    REQUIRE(with_res.data[i] == without.data[i] + x.data[i]);
  }
}

TEST_CASE("forward validation errors") {
  haarkit::Xoshiro256StarStar rng(0xbad);
  LayerParams p = random_params(1, 2, 3, 4, 4, rng);
  REQUIRE_THROWS_AS(haarkit::forward(random_tensor(1, 3, 4, 4, rng), p),
                    std::invalid_argument);  // channel mismatch
  REQUIRE_THROWS_AS(haarkit::forward(random_tensor(1, 2, 8, 8, rng), p),
                    std::invalid_argument);  // padded size mismatch
  p.residual = true;                         // c_in=2, c_out=3
  REQUIRE_THROWS_AS(haarkit::forward(random_tensor(1, 2, 4, 4, rng), p),
                    std::invalid_argument);
  LayerParams broken = random_params(2, 2, 2, 4, 4, rng);
  broken.mix.pop_back();
  REQUIRE_THROWS_AS(haarkit::forward(random_tensor(1, 2, 4, 4, rng), broken),
                    std::invalid_argument);
}

TEST_CASE("analytic gradients match central finite differences") {
  REQUIRE(layerref::grad_sweep_worst(/*residual=*/false, 0x6ead1, 100) < 1e-4);
}

TEST_CASE("analytic gradients match finite differences with residual") {
  REQUIRE(layerref::grad_sweep_worst(/*residual=*/true, 0x6ead2, 100) < 1e-4);
}

TEST_CASE("backward trivia: zero grad_out and residual pass-through") {
  haarkit::Xoshiro256StarStar rng(0x0);
  LayerParams p = random_params(2, 2, 2, 4, 4, rng, /*residual=*/false);
  const Tensor4 x = random_tensor(1, 2, 4, 4, rng);
  const auto result = haarkit::forward(x, p);

  const Tensor4 zero(1, 2, 4, 4);
  const haarkit::LayerGrads zg = haarkit::backward(zero, result.cache);
  for (double v : zg.input.data) REQUIRE(v == 0.0);
  for (int i = 0; i < p.paths; ++i) {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        REQUIRE(zg.scale[i](r, c) == 0.0);
        REQUIRE(zg.threshold_raw[i](r, c) == 0.0);
      }
    for (int o = 0; o < p.c_out; ++o)
      for (int c = 0; c < p.c_in; ++c) REQUIRE(zg.mix[i](o, c) == 0.0);
  }

  // residual on: input gradient gains exactly grad_out
  const Tensor4 gout = random_tensor(1, 2, 4, 4, rng);
  const haarkit::LayerGrads base = haarkit::backward(gout, result.cache);
  p.residual = true;
  const auto result_res = haarkit::forward(x, p);
  const haarkit::LayerGrads with_res = haarkit::backward(gout, result_res.cache);
  for (std::size_t i = 0; i < gout.size(); ++i) {
    REQUIRE(with_res.input.data[i] == base.input.data[i] + gout.data[i]);
  }
}

TEST_CASE("backward rejects mismatched caches") {
  haarkit::Xoshiro256StarStar rng(0x57a1e);
  LayerParams p = random_params(1, 2, 2, 4, 4, rng);
  const Tensor4 x = random_tensor(1, 2, 4, 4, rng);
  auto result = haarkit::forward(x, p);
  REQUIRE_THROWS_AS(haarkit::backward(Tensor4(1, 2, 8, 8), result.cache),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(haarkit::backward(Tensor4(2, 2, 4, 4), result.cache),
                    std::invalid_argument);
  auto broken = result;
  broken.cache.scaled.pop_back();
  REQUIRE_THROWS_AS(haarkit::backward(Tensor4(1, 2, 4, 4), broken.cache),
                    std::invalid_argument);
}

TEST_CASE("init_params defaults and determinism") {
  const LayerParams a = haarkit::init_params<double>(2, 3, 5, 8, 8, 42);
  const LayerParams b = haarkit::init_params<double>(2, 3, 5, 8, 8, 42);
  const LayerParams c = haarkit::init_params<double>(2, 3, 5, 8, 8, 43);

  const double bound = std::sqrt(1.0 / 3.0);
  bool any_differs_from_c = false;
  for (int i = 0; i < 2; ++i) {
    for (int r = 0; r < 8; ++r)
      for (int cc = 0; cc < 8; ++cc) {
        REQUIRE(a.scale[i](r, cc) == 1.0);
        const double t_eff = haarkit::softplus(a.threshold_raw[i](r, cc));
        REQUIRE(t_eff > 0.009);
        REQUIRE(t_eff < 0.011);
      }
    REQUIRE(a.mix[i] == b.mix[i]);
    for (int o = 0; o < 5; ++o)
      for (int ci = 0; ci < 3; ++ci) {
        REQUIRE(std::abs(a.mix[i](o, ci)) < bound);
        if (a.mix[i](o, ci) != c.mix[i](o, ci)) any_differs_from_c = true;
      }
  }
  REQUIRE(any_differs_from_c);

  REQUIRE_THROWS_AS(haarkit::init_params<double>(0, 1, 1, 4, 4, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(haarkit::init_params<double>(1, 1, 1, 3, 4, 0), std::invalid_argument);
}

TEST_CASE("layer parameters survive a JSON checkpoint round trip") {
  haarkit::Xoshiro256StarStar rng(0x15e);
  LayerParams p = random_params(2, 2, 3, 4, 4, rng);
  const nlohmann::json j = haarkit::params_to_json(p);
  const LayerParams q = haarkit::params_from_json(j);
  REQUIRE(q.paths == p.paths);
  REQUIRE(q.residual == p.residual);
  REQUIRE(q.threshold_mode == p.threshold_mode);
  for (int i = 0; i < p.paths; ++i) {
    REQUIRE(q.scale[i] == p.scale[i]);
    REQUIRE(q.mix[i] == p.mix[i]);
    REQUIRE(q.threshold_raw[i] == p.threshold_raw[i]);
  }
}
