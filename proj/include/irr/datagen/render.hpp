#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irr/core/fields.hpp"
#include "irr/datagen/scene.hpp"

namespace irr::datagen {

using core::FlowField;
using core::Image;
using core::OcclusionMap;

/// Per-pixel index of the visible layer.
struct LayerIndexMap {
  int height = 0;
  int width = 0;
  std::vector<int> index;

  int at(int y, int x) const { return index[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const LayerIndexMap&, const LayerIndexMap&) = default;
};

struct RenderedPair {
  Image image1, image2;
  LayerIndexMap index1, index2;
};

/// Visible layer per pixel of frame 1 or 2. In frame 2 a layer covers pixel q
/// when its inverse motion maps q into the layer's region; the frontmost
/// covering layer wins.
LayerIndexMap layer_index_map(const MotionSpec& spec, int frame);

/// Point-sampled painter's-algorithm rendering of both frames.
RenderedPair render_pair(const MotionSpec& spec);

enum class Direction { Forward, Backward };

/// Forward: H_l p - p for the layer l visible at p in frame 1. Backward:
/// H_l^{-1} p - p for the layer visible at p in frame 2.
FlowField analytic_flow(const MotionSpec& spec, Direction direction);

/// Occlusion of frame 1 (or 2): the visible layer point, mapped into the other
/// frame, lands outside [0, W-1] x [0, H-1] or at a pixel (rounded to nearest)
/// where a different layer is visible.
OcclusionMap analytic_occlusion(const MotionSpec& spec, int frame);

/// Marks pixels whose target (x + u, y + v) lies outside [0, W-1] x [0, H-1].
OcclusionMap mark_out_of_bounds(const OcclusionMap& occ, const FlowField& flow);

/// Training sample: image pair with flows in both directions and occlusion for
/// both frames. `valid` is an optional (1,H,W) mask of pixels with flow GT.
struct SceneSample {
  std::string id;
  std::uint64_t seed = 0;
  Image image1, image2;
  FlowField flow_fw, flow_bw;
  OcclusionMap occ1, occ2;
  std::optional<core::Tensor> valid;
  std::optional<MotionSpec> spec;
};

/// Renders a scene and its ground truth.
SceneSample make_sample(std::uint64_t seed, const SceneConfig& config);

/// Rounds images to 8-bit levels and flows to float32, i.e. the precision
/// they are stored with on disk.
void quantize(SceneSample& sample);

}  // namespace irr::datagen
