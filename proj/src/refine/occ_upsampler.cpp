#include "irr/refine/occ_upsampler.hpp"

#include <string>

#include "irr/core/core_ops.hpp"
#include "irr/core/ops.hpp"

namespace irr::refine {

using core::Var;

void init_resblock_stack(core::ParameterSet& set, int in_channels, const ResBlockStackConfig& cfg,
                         core::Rng& rng, bool zero_output) {
  if (cfg.width < 1 || cfg.blocks < 0) throw core::InvalidArgument("invalid ResBlockStack config");
  core::add_conv(set, "entry", in_channels, cfg.width, 3, rng);
  core::add_conv(set, "block.conv1", cfg.width, cfg.width, 3, rng);
  core::add_conv(set, "block.conv2", cfg.width, cfg.width, 3, rng);
  core::add_conv(set, "exit", cfg.width, cfg.width, 3, rng);
  core::add_conv(set, "out", cfg.width, 1, 3, rng, zero_output ? 0.0 : 0.1);
}

std::size_t resblock_stack_parameter_count(int in_channels, const ResBlockStackConfig& cfg) {
  return core::conv_parameter_count(in_channels, cfg.width, 3) +
         3 * core::conv_parameter_count(cfg.width, cfg.width, 3) +
         core::conv_parameter_count(cfg.width, 1, 3);
}

Var resblock_stack(const Var& x, core::ParamBinding& binding, const core::ParameterSet& stack,
                   const ResBlockStackConfig& cfg) {
  const Var entry = core::apply_conv(binding, stack, "entry", x);
  Var h = entry;
  for (int b = 0; b < cfg.blocks; ++b) {
    Var r = core::relu(core::apply_conv(binding, stack, "block.conv1", h));
    r = core::apply_conv(binding, stack, "block.conv2", r);
    h = core::add(h, core::scale(r, cfg.residual_scale));
  }
  h = core::add(core::apply_conv(binding, stack, "exit", h), entry);
  return core::apply_conv(binding, stack, "out", h);
}

Var occlusion_upsample(const Var& occ_logits, const Var& flow_fw, const Var& flow_bw,
                       const Var& feat, const Var& feat_other, core::ParamBinding& binding,
                       const core::ParameterSet& stack, const ResBlockStackConfig& cfg) {
  const int h = occ_logits.height(), w = occ_logits.width();
  for (const Var* v : {&flow_fw, &flow_bw, &feat, &feat_other}) {
    if (v->height() != h || v->width() != w) {
      throw core::InvalidArgument("occlusion_upsample: input " + core::shape_string(v->shape()) +
                                  " does not match occlusion logits " +
                                  core::shape_string(occ_logits.shape()));
    }
  }
  if (occ_logits.channels() != 1) throw core::InvalidArgument("occlusion_upsample: logits need 1 channel");
  const Var warped_flow = core::bilinear_warp(flow_bw, flow_fw);
  const Var warped_feat = core::bilinear_warp(feat_other, flow_fw);
  const Var input = core::concat_channels({
      core::upsample_flow_x2(flow_fw),
      core::upsample_flow_x2(warped_flow),
      core::resize_bilinear(feat, 2 * h, 2 * w),
      core::resize_bilinear(warped_feat, 2 * h, 2 * w),
  });
  return core::add(core::nearest_upsample_x2(occ_logits), resblock_stack(input, binding, stack, cfg));
}

}  // namespace irr::refine
