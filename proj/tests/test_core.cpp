#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "irr/core/core_ops.hpp"
#include "irr/core/ops.hpp"
#include "oracles.hpp"

namespace irr {
namespace {

using core::Rng;
using core::Tensor;
using core::Var;
using testing::random_tensor;

Tensor ramp(int c, int h, int w) {
  Tensor t = Tensor::chw(c, h, w);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) + 1.0;
  return t;
}

Tensor const_flow(int h, int w, double u, double v) {
  Tensor f = Tensor::chw(2, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f(0, y, x) = u;
      f(1, y, x) = v;
    }
  return f;
}

TEST(Warp, ZeroFlowIsIdentity) {
  Rng rng(1);
  const Tensor src = random_tensor(rng, {3, 5, 7});
  const Var out = core::bilinear_warp(core::constant(src), core::zeros(2, 5, 7));
  EXPECT_LE(core::max_abs_diff(out.value(), src), 1e-6);
  EXPECT_EQ(out.value(), src);
}

TEST(Warp, UnitShiftMatchesIndexShift) {
  const Tensor src = ramp(1, 4, 4);
  const Tensor out =
      core::bilinear_warp(core::constant(src), core::constant(const_flow(4, 4, 1.0, 0.0))).value();
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_EQ(out(0, y, x), x + 1 < 4 ? src(0, y, x + 1) : 0.0);
}

TEST(Warp, HalfPixelOnConstantAttenuatesBorder) {
  const Tensor src = Tensor::chw(1, 4, 4, 1.0);
  const Tensor out =
      core::bilinear_warp(core::constant(src), core::constant(const_flow(4, 4, 0.5, 0.5))).value();
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const double expect = (x < 3 ? 1.0 : 0.5) * (y < 3 ? 1.0 : 0.5);
      EXPECT_DOUBLE_EQ(out(0, y, x), expect) << y << "," << x;
    }
}

TEST(Warp, MatchesOracleAndIsLinearInSource) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = rng.uniform_int(1, 8), w = rng.uniform_int(1, 8);
    const Tensor s1 = random_tensor(rng, {2, h, w}), s2 = random_tensor(rng, {2, h, w});
    const Var flow = core::constant(random_tensor(rng, {2, h, w}, -3, 3));
    const Tensor o1 = core::bilinear_warp(core::constant(s1), flow).value();
    EXPECT_LE(core::max_abs_diff(o1, testing::warp_oracle(s1, flow.value())), 1e-12);

    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    Tensor mix = s1;
    mix *= a;
    Tensor t2 = s2;
    t2 *= b;
    mix += t2;
    Tensor expect = o1;
    expect *= a;
    Tensor o2 = core::bilinear_warp(core::constant(s2), flow).value();
    o2 *= b;
    expect += o2;
    EXPECT_LE(core::max_abs_diff(core::bilinear_warp(core::constant(mix), flow).value(), expect),
              1e-12);
  }
}

TEST(Warp, RejectsShapeMismatch) {
  EXPECT_THROW(core::bilinear_warp(core::zeros(1, 4, 4), core::zeros(2, 4, 5)),
               core::InvalidArgument);
  EXPECT_THROW(core::bilinear_warp(core::zeros(1, 4, 4), core::zeros(1, 4, 4)),
               core::InvalidArgument);
}

TEST(CostVolume, MatchesNestedLoopOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int c = rng.uniform_int(1, 4), h = rng.uniform_int(1, 8), w = rng.uniform_int(1, 8);
    const int d = rng.uniform_int(0, 2);
    const Tensor f1 = random_tensor(rng, {c, h, w}), f2 = random_tensor(rng, {c, h, w});
    const Tensor out = core::cost_volume(core::constant(f1), core::constant(f2), d).value();
    ASSERT_EQ(out.channels(), (2 * d + 1) * (2 * d + 1));
    EXPECT_LE(core::max_abs_diff(out, testing::cost_volume_oracle(f1, f2, d)), 1e-12);
  }
}

TEST(CostVolume, SelfCorrelationPeaksAtZeroDisplacement) {
  Rng rng(4);
  const Tensor f = random_tensor(rng, {1, 5, 5}, 0.0, 1.0);
  const Tensor out = core::cost_volume(core::constant(f), core::constant(f), 1).value();
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) EXPECT_DOUBLE_EQ(out(4, y, x), f(0, y, x) * f(0, y, x));
}

TEST(CostVolume, DegenerateCases) {
  Rng rng(5);
  const Tensor f2 = random_tensor(rng, {3, 4, 4});
  const Tensor zero = core::cost_volume(core::zeros(3, 4, 4), core::constant(f2), 2).value();
  for (double v : zero.values()) EXPECT_EQ(v, 0.0);

  const Tensor f1 = random_tensor(rng, {3, 4, 4});
  const Tensor d0 = core::cost_volume(core::constant(f1), core::constant(f2), 0).value();
  ASSERT_EQ(d0.channels(), 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      double s = 0;
      for (int c = 0; c < 3; ++c) s += f1(c, y, x) * f2(c, y, x);
      EXPECT_NEAR(d0(0, y, x), s / 3, 1e-15);
    }
  EXPECT_THROW(core::cost_volume(core::constant(f1), core::constant(f2), -1), core::InvalidArgument);
  EXPECT_THROW(core::cost_volume(core::constant(f1), core::zeros(3, 4, 5), 1),
               core::InvalidArgument);
}

TEST(UpsampleFlow, ConstantAndZeroFields) {
  const Tensor up = core::upsample_flow_x2(core::constant(const_flow(4, 4, 1.0, 1.0))).value();
  ASSERT_EQ(up.shape(), (std::vector<int>{2, 8, 8}));
  for (double v : up.values()) EXPECT_DOUBLE_EQ(v, 2.0);

  const Tensor c = core::upsample_flow_x2(core::constant(const_flow(3, 5, -0.7, 2.5))).value();
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 10; ++x) {
      EXPECT_DOUBLE_EQ(c(0, y, x), -1.4);
      EXPECT_DOUBLE_EQ(c(1, y, x), 5.0);
    }
  const Tensor z = core::upsample_flow_x2(core::zeros(2, 4, 4)).value();
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
}

TEST(UpsampleFlow, ImpulseGivesDoubledBilinearKernel) {
  Tensor f = Tensor::chw(2, 4, 4);
  f(0, 1, 2) = 1.0;
  f(1, 1, 2) = -3.0;
  const Tensor up = core::upsample_flow_x2(core::constant(f)).value();
  auto k = [](int out, int at) { return std::max(0.0, 1.0 - std::abs(out / 2.0 - 0.25 - at)); };
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      EXPECT_NEAR(up(0, y, x), 2.0 * k(y, 1) * k(x, 2), 1e-15);
      EXPECT_NEAR(up(1, y, x), -6.0 * k(y, 1) * k(x, 2), 1e-15);
    }
}

TEST(Resize, IdentityConstantAndOracle) {
  Rng rng(6);
  const Tensor x = random_tensor(rng, {2, 5, 6});
  EXPECT_EQ(core::resize_bilinear(core::constant(x), 5, 6).value(), x);

  const Tensor c = Tensor::chw(1, 2, 2, 0.375);
  const Tensor big = core::resize_bilinear(core::constant(c), 7, 3).value();
  for (double v : big.values()) EXPECT_DOUBLE_EQ(v, 0.375);

  const Tensor r = ramp(1, 4, 4);
  const Tensor down = core::resize_bilinear(core::constant(r), 2, 2).value();
  EXPECT_LE(core::max_abs_diff(down, testing::resize_oracle(r, 2, 2)), 1e-12);
  // Half-pixel centres put each 2x2 output at the middle of a 2x2 input block.
  EXPECT_DOUBLE_EQ(down(0, 0, 0), (1 + 2 + 5 + 6) / 4.0);

  for (int trial = 0; trial < 100; ++trial) {
    const int h = rng.uniform_int(1, 8), w = rng.uniform_int(1, 8);
    const int th = rng.uniform_int(1, 12), tw = rng.uniform_int(1, 12);
    const Tensor in = random_tensor(rng, {2, h, w});
    EXPECT_LE(core::max_abs_diff(core::resize_bilinear(core::constant(in), th, tw).value(),
                                 testing::resize_oracle(in, th, tw)),
              1e-12);
  }
  EXPECT_THROW(core::resize_bilinear(core::constant(x), 0, 3), core::InvalidArgument);
}

TEST(ResizeFlow, RescalesEachAxis) {
  const Tensor f = const_flow(4, 8, 1.0, 1.0);
  const Tensor out = core::resize_flow(core::constant(f), 2, 16).value();
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 16; ++x) {
      EXPECT_DOUBLE_EQ(out(0, y, x), 2.0);
      EXPECT_DOUBLE_EQ(out(1, y, x), 0.5);
    }
}

core::ParameterSet adapter_params(const Tensor& weight, const Tensor& bias) {
  core::ParameterSet p("adapter.test");
  p.add("weight", weight);
  p.add("bias", bias);
  return p;
}

TEST(ChannelAdapter, IdentityZeroAndMatmulOracle) {
  Rng rng(7);
  const Tensor x = random_tensor(rng, {3, 2, 2});
  Tensor eye({3, 3, 1, 1});
  for (int i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
  {
    auto p = adapter_params(eye, Tensor({3}));
    core::ParamBinding b;
    EXPECT_EQ(core::channel_adapter(core::constant(x), 3, b, p).value(), x);
  }
  {
    auto p = adapter_params(Tensor({2, 3, 1, 1}), Tensor({2}));
    core::ParamBinding b;
    const Tensor out = core::channel_adapter(core::constant(x), 2, b, p).value();
    for (double v : out.values()) EXPECT_EQ(v, 0.0);
  }
  const Tensor wgt = random_tensor(rng, {2, 3, 1, 1}), bias = random_tensor(rng, {2});
  auto p = adapter_params(wgt, bias);
  core::ParamBinding b;
  const Tensor out = core::channel_adapter(core::constant(x), 2, b, p).value();
  for (int o = 0; o < 2; ++o)
    for (int y = 0; y < 2; ++y)
      for (int xx = 0; xx < 2; ++xx) {
        double s = bias[o];
        for (int i = 0; i < 3; ++i) s += wgt[o * 3 + i] * x(i, y, xx);
        EXPECT_NEAR(out(o, y, xx), s, 1e-14);
      }
  EXPECT_THROW(core::channel_adapter(core::constant(x), 3, b, p), core::InvalidArgument);
}

TEST(AreaDownsample, AveragesBlocksAndPartialEdges) {
  Tensor x = Tensor::chw(1, 3, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const Tensor d = core::area_downsample(x, 2);
  ASSERT_EQ(d.shape(), (std::vector<int>{1, 2, 2}));
  EXPECT_DOUBLE_EQ(d(0, 0, 0), (0 + 1 + 3 + 4) / 4.0);
  EXPECT_DOUBLE_EQ(d(0, 0, 1), (2 + 5) / 2.0);
  EXPECT_DOUBLE_EQ(d(0, 1, 0), (6 + 7) / 2.0);
  EXPECT_DOUBLE_EQ(d(0, 1, 1), 8.0);
}

// Gradients.

TEST(Gradients, BilinearWarp) {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const int h = rng.uniform_int(2, 4), w = rng.uniform_int(2, 4);
    const Tensor r = random_tensor(rng, {2, h, w});
    const auto res = testing::grad_check(
        [&](const std::vector<Var>& v) {
          return testing::weighted_sum(core::bilinear_warp(v[0], v[1]), r);
        },
        {random_tensor(rng, {2, h, w}), testing::random_fractional_flow(rng, h, w, 1.5)});
    EXPECT_LE(res.max_rel_error, 1e-3);
  }
}

TEST(Gradients, CostVolume) {
  Rng rng(9);
  const Tensor r = random_tensor(rng, {9, 4, 4});
  const auto res = testing::grad_check(
      [&](const std::vector<Var>& v) {
        return testing::weighted_sum(core::cost_volume(v[0], v[1], 1), r);
      },
      {random_tensor(rng, {3, 4, 4}), random_tensor(rng, {3, 4, 4})});
  EXPECT_LE(res.max_rel_error, 1e-3);
}

TEST(Gradients, UpsampleResizeAndAdapter) {
  Rng rng(10);
  const Tensor r8 = random_tensor(rng, {2, 8, 8});
  EXPECT_LE(testing::grad_check(
                [&](const std::vector<Var>& v) {
                  return testing::weighted_sum(core::upsample_flow_x2(v[0]), r8);
                },
                {random_tensor(rng, {2, 4, 4})})
                .max_rel_error,
            1e-3);
  const Tensor r35 = random_tensor(rng, {2, 3, 5});
  EXPECT_LE(testing::grad_check(
                [&](const std::vector<Var>& v) {
                  return testing::weighted_sum(core::resize_flow(v[0], 3, 5), r35);
                },
                {random_tensor(rng, {2, 4, 4})})
                .max_rel_error,
            1e-3);
  auto p = adapter_params(random_tensor(rng, {2, 3, 1, 1}), random_tensor(rng, {2}));
  const Tensor r2 = random_tensor(rng, {2, 4, 4});
  EXPECT_LE(testing::grad_check(
                [&](const std::vector<Var>& v) {
                  core::ParamBinding b(false);
                  return testing::weighted_sum(core::channel_adapter(v[0], 2, b, p), r2);
                },
                {random_tensor(rng, {3, 4, 4})})
                .max_rel_error,
            1e-3);
}

TEST(Gradients, AdapterParametersThroughBinding) {
  Rng rng(11);
  auto p = adapter_params(random_tensor(rng, {2, 3, 1, 1}), random_tensor(rng, {2}));
  const Tensor x = random_tensor(rng, {3, 3, 3}), r = random_tensor(rng, {2, 3, 3});
  core::ParamBinding b;
  core::backward(testing::weighted_sum(core::channel_adapter(core::constant(x), 2, b, p), r));
  const Tensor analytic = b.gradients().at("adapter.test")[0];
  for (std::size_t k = 0; k < p.tensor("weight").size(); ++k) {
    auto eval = [&](double d) {
      p.tensor("weight")[k] += d;
      core::ParamBinding pb(false);
      const double v =
          testing::weighted_sum(core::channel_adapter(core::constant(x), 2, pb, p), r).value()[0];
      p.tensor("weight")[k] -= d;
      return v;
    };
    EXPECT_NEAR(analytic[k], (eval(1e-6) - eval(-1e-6)) / 2e-6, 1e-6);
  }
}

TEST(Gradients, GenericOps) {
  Rng rng(12);
  const Tensor r = random_tensor(rng, {2, 3, 3});
  const Tensor w = random_tensor(rng, {2, 2, 3, 3}), b = random_tensor(rng, {2});
  EXPECT_LE(testing::grad_check(
                [&](const std::vector<Var>& v) {
                  Var y = core::conv2d(v[0], v[1], v[2], 1, 1);
                  y = core::leaky_relu(y);
                  y = core::softmax_channels(y);
                  return testing::weighted_sum(core::sigmoid(y), r);
                },
                {random_tensor(rng, {2, 3, 3}), w, b})
                .max_rel_error,
            1e-3);
  const Tensor r2 = random_tensor(rng, {2, 2, 2});
  EXPECT_LE(testing::grad_check(
                [&](const std::vector<Var>& v) {
                  return testing::weighted_sum(core::conv2d(v[0], v[1], v[2], 2, 1), r2);
                },
                {random_tensor(rng, {2, 4, 4}), w, b})
                .max_rel_error,
            1e-3);
}

TEST(Random, SeedsAreReproducible) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(core::combine_seeds(1, 2), core::combine_seeds(2, 1));
  EXPECT_EQ(core::fnv1a64(""), 0xCBF29CE484222325ull);
}

}  // namespace
}  // namespace irr
