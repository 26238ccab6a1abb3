#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "irr/core/core_ops.hpp"
#include "irr/core/ops.hpp"
#include "irr/refine/bilateral.hpp"
#include "irr/refine/occ_upsampler.hpp"
#include "oracles.hpp"

namespace irr {
namespace {

using core::Rng;
using core::Tensor;
using core::Var;
using testing::random_tensor;

Tensor random_kernels(Rng& rng, int window, int h, int w) {
  Tensor k = random_tensor(rng, {window * window, h, w}, 0.0, 1.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int c = 0; c < window * window; ++c) s += k(c, y, x);
      for (int c = 0; c < window * window; ++c) k(c, y, x) /= s;
    }
  return k;
}

void expect_normalized(const refine::BilateralKernelField& k) {
  const Tensor& t = k.weights.value();
  ASSERT_EQ(t.channels(), k.window * k.window);
  for (int y = 0; y < t.height(); ++y)
    for (int x = 0; x < t.width(); ++x) {
      double s = 0;
      for (int c = 0; c < t.channels(); ++c) {
        EXPECT_GE(t(c, y, x), 0.0);
        s += t(c, y, x);
      }
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
}

TEST(Kernels, UniformLogitsGiveUniformKernels) {
  for (int w : {1, 3, 5}) {
    const auto k = refine::kernels_from_logits(core::constant(Tensor::chw(w * w, 3, 4, 0.7)), w);
    for (double v : k.weights.value().values()) EXPECT_NEAR(v, 1.0 / (w * w), 1e-15);
  }
}

TEST(Kernels, HeadOutputsAreNormalized) {
  Rng rng(1);
  core::ParameterSet flow_head("bilateral.flow"), occ_head("bilateral.occ");
  refine::KernelHeadConfig cfg{5, 8};
  refine::init_kernel_head(flow_head, 6 + 2, cfg, rng);
  refine::init_kernel_head(occ_head, 1 + 6 + 6, cfg, rng);
  const Var feat = core::constant(random_tensor(rng, {6, 5, 7}));
  const Var other = core::constant(random_tensor(rng, {6, 5, 7}));
  core::ParamBinding b;
  const auto kf = refine::build_flow_kernels(feat, core::constant(random_tensor(rng, {2, 5, 7}, -3, 3)),
                                             b, flow_head, 5);
  expect_normalized(kf);
  const auto ko = refine::build_occ_kernels(core::constant(random_tensor(rng, {1, 5, 7}, 0, 1)), feat,
                                            other, b, occ_head, 5);
  expect_normalized(ko);
  EXPECT_NE(flow_head.id(), occ_head.id());
}

TEST(Kernels, ParameterCountMatchesConvArithmetic) {
  core::ParameterSet head("bilateral.flow");
  Rng rng(2);
  const int in = 32 + 2;
  refine::init_kernel_head(head, in, {5, 32}, rng);
  const std::size_t expect = (9 * in + 1) * 32 + (9 * 32 + 1) * 32 + (9 * 32 + 1) * 25;
  EXPECT_EQ(head.parameter_count(), expect);
  EXPECT_EQ(refine::kernel_head_parameter_count(in, {5, 32}), expect);
}

TEST(Kernels, RejectsBadWindows) {
  EXPECT_THROW(refine::validate_window(4), core::InvalidArgument);
  EXPECT_THROW(refine::validate_window(0), core::InvalidArgument);
  EXPECT_THROW(refine::validate_window(-3), core::InvalidArgument);
  EXPECT_NO_THROW(refine::validate_window(3));
  EXPECT_THROW(refine::kernels_from_logits(core::zeros(8, 2, 2), 3), core::InvalidArgument);
}

TEST(Bilateral, ConstantFieldIsPreservedAwayFromBorder) {
  Rng rng(3);
  const int w = 5, h = 9, wd = 10, r = w / 2;
  const refine::BilateralKernelField k{core::constant(random_kernels(rng, w, h, wd)), w};
  const Tensor out = refine::apply_bilateral(core::constant(Tensor::chw(1, h, wd, 2.5)), k).value();
  for (int y = r; y < h - r; ++y)
    for (int x = r; x < wd - r; ++x) EXPECT_NEAR(out(0, y, x), 2.5, 1e-12);
  // The border loses the weight that falls outside the grid.
  EXPECT_LT(out(0, 0, 0), 2.5);
}

TEST(Bilateral, CenterOneHotIsIdentity) {
  Rng rng(4);
  const Tensor field = random_tensor(rng, {2, 6, 6});
  Tensor k = Tensor::chw(9, 6, 6);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) k(4, y, x) = 1.0;
  EXPECT_EQ(refine::apply_bilateral(core::constant(field), {core::constant(k), 3}).value(), field);
}

TEST(Bilateral, MatchesNestedLoopOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 150; ++trial) {
    const int w = 2 * rng.uniform_int(0, 2) + 1;
    const int h = rng.uniform_int(1, 8), wd = rng.uniform_int(1, 8), c = rng.uniform_int(1, 2);
    const Tensor field = random_tensor(rng, {c, h, wd});
    const Tensor k = random_kernels(rng, w, h, wd);
    const Tensor out = refine::apply_bilateral(core::constant(field), {core::constant(k), w}).value();
    EXPECT_LE(core::max_abs_diff(out, testing::bilateral_oracle(field, k, w)), 1e-12);
  }
}

TEST(Bilateral, RejectsMisalignedKernels) {
  Rng rng(6);
  const refine::BilateralKernelField k{core::constant(random_kernels(rng, 3, 4, 4)), 3};
  EXPECT_THROW(refine::apply_bilateral(core::zeros(1, 4, 5), k), core::InvalidArgument);
  const refine::BilateralKernelField bad{core::constant(random_kernels(rng, 3, 4, 4)), 5};
  EXPECT_THROW(refine::apply_bilateral(core::zeros(1, 4, 4), bad), core::InvalidArgument);
}

TEST(Gradients, ApplyBilateral) {
  Rng rng(7);
  const Tensor r = random_tensor(rng, {2, 6, 6});
  const auto res = testing::grad_check(
      [&](const std::vector<Var>& v) {
        return testing::weighted_sum(refine::apply_bilateral(v[0], {v[1], 3}), r);
      },
      {random_tensor(rng, {2, 6, 6}), random_kernels(rng, 3, 6, 6)});
  EXPECT_LE(res.max_rel_error, 1e-3);
}

TEST(Gradients, KernelHeadThroughSoftmax) {
  Rng rng(8);
  core::ParameterSet head("bilateral.flow");
  refine::init_kernel_head(head, 3 + 2, {3, 4}, rng);
  const Tensor r = random_tensor(rng, {2, 4, 4});
  const auto res = testing::grad_check(
      [&](const std::vector<Var>& v) {
        core::ParamBinding b(false);
        const auto k = refine::build_flow_kernels(v[0], v[1], b, head, 3);
        return testing::weighted_sum(refine::apply_bilateral(v[1], k), r);
      },
      {random_tensor(rng, {3, 4, 4}), random_tensor(rng, {2, 4, 4}, -2, 2)});
  EXPECT_LE(res.max_rel_error, 1e-3);
}

struct UpsamplerInputs {
  Tensor logits, fw, bw, feat, other;
};

UpsamplerInputs upsampler_inputs(Rng& rng, int f, int h, int w) {
  return {random_tensor(rng, {1, h, w}, -2, 2), testing::random_fractional_flow(rng, h, w, 1.2),
          random_tensor(rng, {2, h, w}, -1, 1), random_tensor(rng, {f, h, w}),
          random_tensor(rng, {f, h, w})};
}

TEST(OccUpsampler, ZeroResidualGivesNearestUpsample) {
  Rng rng(9);
  const refine::ResBlockStackConfig cfg{8, 3, 0.1};
  core::ParameterSet stack("upsampler.resblocks");
  refine::init_resblock_stack(stack, refine::upsampler_input_channels(4), cfg, rng, true);
  const auto in = upsampler_inputs(rng, 4, 3, 5);
  core::ParamBinding b;
  const Tensor out =
      refine::occlusion_upsample(core::constant(in.logits), core::constant(in.fw),
                                 core::constant(in.bw), core::constant(in.feat),
                                 core::constant(in.other), b, stack, cfg)
          .value();
  ASSERT_EQ(out.shape(), (std::vector<int>{1, 6, 10}));
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 10; ++x) EXPECT_EQ(out(0, y, x), in.logits(0, y / 2, x / 2));
}

TEST(OccUpsampler, ZeroInputZeroOutputConvGivesZeroResidual) {
  Rng rng(10);
  const refine::ResBlockStackConfig cfg;
  core::ParameterSet stack("upsampler.resblocks");
  refine::init_resblock_stack(stack, 6, cfg, rng, true);
  core::ParamBinding b;
  const Tensor out = refine::resblock_stack(core::zeros(6, 4, 4), b, stack, cfg).value();
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(OccUpsampler, TwoApplicationsShareOneStack) {
  Rng rng(11);
  const refine::ResBlockStackConfig cfg{8, 3, 0.1};
  core::ParameterSet stack("upsampler.resblocks");
  refine::init_resblock_stack(stack, refine::upsampler_input_channels(3), cfg, rng);
  const std::size_t before = stack.parameter_count();
  EXPECT_EQ(before, refine::resblock_stack_parameter_count(refine::upsampler_input_channels(3), cfg));
  EXPECT_EQ(before, core::conv_parameter_count(10, 8, 3) + 3 * core::conv_parameter_count(8, 8, 3) +
                        core::conv_parameter_count(8, 1, 3));

  const auto q = upsampler_inputs(rng, 3, 3, 4);
  core::ParamBinding b;
  const Var half = refine::occlusion_upsample(
      core::constant(q.logits), core::constant(q.fw), core::constant(q.bw), core::constant(q.feat),
      core::constant(q.other), b, stack, cfg);
  const auto h = upsampler_inputs(rng, 3, 6, 8);
  const Var full = refine::occlusion_upsample(half, core::constant(h.fw), core::constant(h.bw),
                                              core::constant(h.feat), core::constant(h.other), b,
                                              stack, cfg);
  EXPECT_EQ(full.shape(), (std::vector<int>{1, 12, 16}));
  EXPECT_EQ(stack.parameter_count(), before);
  EXPECT_EQ(b.gradients().size(), 1u);
}

TEST(OccUpsampler, RejectsResolutionMismatch) {
  Rng rng(12);
  const refine::ResBlockStackConfig cfg{8, 3, 0.1};
  core::ParameterSet stack("upsampler.resblocks");
  refine::init_resblock_stack(stack, refine::upsampler_input_channels(2), cfg, rng);
  const auto in = upsampler_inputs(rng, 2, 3, 3);
  core::ParamBinding b;
  EXPECT_THROW(refine::occlusion_upsample(core::zeros(1, 3, 4), core::constant(in.fw),
                                          core::constant(in.bw), core::constant(in.feat),
                                          core::constant(in.other), b, stack, cfg),
               core::InvalidArgument);
}

TEST(Gradients, OcclusionUpsample) {
  Rng rng(13);
  const refine::ResBlockStackConfig cfg{4, 3, 0.1};
  core::ParameterSet stack("upsampler.resblocks");
  refine::init_resblock_stack(stack, refine::upsampler_input_channels(2), cfg, rng);
  const auto in = upsampler_inputs(rng, 2, 3, 3);
  const Tensor r = random_tensor(rng, {1, 6, 6});
  const auto res = testing::grad_check(
      [&](const std::vector<Var>& v) {
        core::ParamBinding b(false);
        return testing::weighted_sum(
            refine::occlusion_upsample(v[0], v[1], v[2], v[3], v[4], b, stack, cfg), r);
      },
      {in.logits, in.fw, in.bw, in.feat, in.other});
  EXPECT_LE(res.max_rel_error, 1e-3);
}

}  // namespace
}  // namespace irr
