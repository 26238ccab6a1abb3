#pragma once

#include <cstddef>

#include "irr/core/autodiff.hpp"
#include "irr/core/params.hpp"

namespace irr::refine {

/// Entry conv -> `blocks` residual blocks (conv, ReLU, conv, multiply) that all
/// reuse one pair of convolutions -> exit conv plus skip from the entry ->
/// final 1-channel conv.
struct ResBlockStackConfig {
  int width = 32;
  int blocks = 3;
  double residual_scale = 0.1;
};

/// Registers the stack in `set`. With `zero_output` the final conv starts at
/// zero, so the initial residual is exactly zero.
void init_resblock_stack(core::ParameterSet& set, int in_channels, const ResBlockStackConfig& cfg,
                         core::Rng& rng, bool zero_output = false);
std::size_t resblock_stack_parameter_count(int in_channels, const ResBlockStackConfig& cfg);

/// Applies the stack and returns its 1-channel output.
core::Var resblock_stack(const core::Var& x, core::ParamBinding& binding,
                         const core::ParameterSet& stack, const ResBlockStackConfig& cfg);

/// Channels the stack consumes for feature maps with `feature_channels` channels.
constexpr int upsampler_input_channels(int feature_channels) { return 4 + 2 * feature_channels; }

/// Occlusion logits at twice the resolution of the inputs.
///
/// The logits are nearest-neighbour upsampled and a residual from the stack is
/// added. The stack sees concat(up(flow_fw), up(warp(flow_bw, flow_fw)),
/// up(feat), up(warp(feat_other, flow_fw))), where flows are upsampled with
/// doubled magnitudes and features bilinearly.
core::Var occlusion_upsample(const core::Var& occ_logits, const core::Var& flow_fw,
                             const core::Var& flow_bw, const core::Var& feat,
                             const core::Var& feat_other, core::ParamBinding& binding,
                             const core::ParameterSet& stack, const ResBlockStackConfig& cfg);

}  // namespace irr::refine
