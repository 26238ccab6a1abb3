#pragma once

#include "irr/core/autodiff.hpp"
#include "irr/core/params.hpp"

namespace irr::core {

/// Default maximum displacement searched by cost_volume.
inline constexpr int kDefaultCostVolumeRange = 4;

/// Backward warp: out(c, y, x) samples `src` bilinearly at (x + u, y + v).
///
/// `flow` is (2, H, W) with u in channel 0 and v in channel 1, in pixels.
/// Samples outside the grid read as zero. Differentiable in src and flow.
Var bilinear_warp(const Var& src, const Var& flow);

/// Correlation cost volume over a (2d+1)^2 displacement window.
///
/// Channel (dy + d) * (2d + 1) + (dx + d) at pixel (x, y) holds the channel
/// mean of f1(x, y) * f2(x + dx, y + dy); out-of-bounds positions are zero.
Var cost_volume(const Var& f1, const Var& f2, int max_displacement = kDefaultCostVolumeRange);

/// Bilinear resize with align_corners = false semantics (half-pixel centers,
/// negative source coordinates clamped to 0, upper neighbour clamped to the edge).
Var resize_bilinear(const Var& x, int target_h, int target_w);

/// 2x bilinear upsampling of a flow field with displacements doubled.
Var upsample_flow_x2(const Var& flow);

/// Resizes a flow field to (h, w) and rescales u by w / W and v by h / H.
/// Reduces to upsample_flow_x2 for an exact doubling.
Var resize_flow(const Var& flow, int target_h, int target_w);

/// 1x1 convolution projecting `feature` to `target_channels`.
///
/// `params` must hold "weight" (target, C, 1, 1) and "bias" (target).
Var channel_adapter(const Var& feature, int target_channels, ParamBinding& binding,
                    const ParameterSet& params);

/// Non-differentiable block-average downsampling by an integer factor. Edge
/// blocks that run past the border average over the pixels they cover.
Tensor area_downsample(const Tensor& x, int factor);

/// Zero-filled (C, H, W) constant.
inline Var zeros(int channels, int height, int width) {
  return constant(Tensor::chw(channels, height, width));
}

}  // namespace irr::core
