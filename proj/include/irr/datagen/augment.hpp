#pragma once

#include <cstdint>

#include <json.hpp>

#include "irr/datagen/render.hpp"

namespace irr::datagen {

/// Defaults are the identity.
struct AugmentConfig {
  double scale_min = 1.0;
  double scale_max = 1.0;
  /// 0 disables cropping.
  int crop_height = 0;
  int crop_width = 0;
  double flip_probability = 0.0;
  /// Additive brightness shift drawn from [-brightness, brightness].
  double brightness = 0.0;
  /// Contrast factor drawn from [1 - contrast, 1 + contrast], applied about 0.5.
  double contrast = 0.0;
  double noise_std = 0.0;
};

void to_json(nlohmann::json& j, const AugmentConfig& c);
void from_json(const nlohmann::json& j, AugmentConfig& c);

/// Mirrors every map left-right and negates u.
SceneSample flip_horizontal(const SceneSample& s);
/// Resizes to (round(s H), round(s W)): images and flows bilinearly with flow
/// vectors rescaled per axis, occlusion and valid masks by nearest neighbour.
SceneSample scale_sample(const SceneSample& s, double factor);
/// Window of size (h, w) at (y0, x0); flow values are unchanged.
SceneSample crop_sample(const SceneSample& s, int y0, int x0, int h, int w);

/// Random scale, crop and flip, then out-of-bound occlusion marking in both
/// frames, then photometric jitter (shared brightness/contrast, independent
/// noise) on the images only.
SceneSample augment(const SceneSample& s, std::uint64_t seed, const AugmentConfig& config);

}  // namespace irr::datagen
