#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace irr::models {

enum class Variant { FlowNetIrr, PwcIrr };
/// Shared: one decoder reused at every step. PerStage: a fresh decoder per
/// step (stacking), used for ablations and audits.
enum class SharingMode { Shared, PerStage };

std::string to_string(Variant v);
std::string to_string(SharingMode m);
Variant parse_variant(const std::string& s);
SharingMode parse_sharing(const std::string& s);

struct ModelConfig {
  Variant variant = Variant::FlowNetIrr;
  /// Number of IRR steps. For pwc-irr this is the number of estimation levels,
  /// pyramid_levels() - output_level + 1.
  int iterations = 1;
  /// Output channels of each pyramid level; level k has stride 2^k.
  std::vector<int> encoder_channels = {16, 32, 32};
  /// flownet-irr: pyramid level whose features are warped and decoded; 0 = deepest.
  int warp_level = 0;
  /// pwc-irr: finest level at which flow is estimated.
  int output_level = 2;
  int decoder_width = 32;
  /// Convolutions per decoder including the output layer.
  int decoder_layers = 5;
  /// pwc-irr (shared): width every level is projected to by its 1x1 adapter.
  int adapter_channels = 32;
  int cost_volume_range = 4;

  bool bidirectional = false;
  bool occlusion = false;
  bool bilateral = false;
  bool occ_upsampler = false;
  SharingMode sharing = SharingMode::Shared;
  /// One bilateral kernel head per step instead of one shared head. Forced for
  /// per-stage pwc-irr, whose levels have different feature widths.
  bool bilateral_per_step = false;

  int bilateral_window = 5;
  int bilateral_width = 32;
  int upsampler_width = 32;
  int upsampler_feature_channels = 16;

  std::uint64_t init_seed = 1;

  int pyramid_levels() const { return static_cast<int>(encoder_channels.size()); }
  /// Pyramid level the final step's estimate lives at.
  int estimate_level() const;
  bool uses_adapters() const { return variant == Variant::PwcIrr && sharing == SharingMode::Shared; }
  bool per_step_bilateral() const {
    return bilateral_per_step || (variant == Variant::PwcIrr && sharing == SharingMode::PerStage);
  }
  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace irr::models
