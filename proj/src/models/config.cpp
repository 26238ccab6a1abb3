#include "irr/models/config.hpp"

#include "irr/core/tensor.hpp"

namespace irr::models {

using core::InvalidArgument;

std::string to_string(Variant v) { return v == Variant::FlowNetIrr ? "flownet-irr" : "pwc-irr"; }
std::string to_string(SharingMode m) { return m == SharingMode::Shared ? "shared" : "per-stage"; }

Variant parse_variant(const std::string& s) {
  if (s == "flownet-irr") return Variant::FlowNetIrr;
  if (s == "pwc-irr") return Variant::PwcIrr;
  throw InvalidArgument("unknown model variant '" + s + "'");
}

SharingMode parse_sharing(const std::string& s) {
  if (s == "shared") return SharingMode::Shared;
  if (s == "per-stage") return SharingMode::PerStage;
  throw InvalidArgument("unknown sharing mode '" + s + "'");
}

int ModelConfig::estimate_level() const {
  if (variant == Variant::PwcIrr) return output_level;
  return warp_level == 0 ? pyramid_levels() : warp_level;
}

void ModelConfig::validate() const {
  if (iterations < 1) throw InvalidArgument("iterations must be >= 1");
  if (encoder_channels.empty()) throw InvalidArgument("encoder needs at least one level");
  for (int c : encoder_channels)
    if (c < 1) throw InvalidArgument("encoder widths must be >= 1");
  if (decoder_width < 1 || decoder_layers < 1) throw InvalidArgument("invalid decoder size");
  if (cost_volume_range < 0) throw InvalidArgument("cost volume range must be >= 0");
  if (bilateral_window < 1 || bilateral_window % 2 == 0) {
    throw InvalidArgument("bilateral window must be odd and >= 1");
  }
  if (bilateral_width < 1 || upsampler_width < 1 || upsampler_feature_channels < 1) {
    throw InvalidArgument("refinement widths must be >= 1");
  }
  if (variant == Variant::FlowNetIrr) {
    if (warp_level < 0 || warp_level > pyramid_levels()) {
      throw InvalidArgument("warp_level out of range");
    }
  } else {
    if (adapter_channels < 1) throw InvalidArgument("adapter width must be >= 1");
    if (output_level < 1 || output_level > pyramid_levels()) {
      throw InvalidArgument("output_level out of range");
    }
    const int levels = pyramid_levels() - output_level + 1;
    if (iterations != levels) {
      throw InvalidArgument("pwc-irr runs one step per estimation level: iterations must be " +
                            std::to_string(levels));
    }
  }
  if (occ_upsampler && !(occlusion && bidirectional)) {
    throw InvalidArgument("the occlusion upsampler needs the occlusion head and bidirectional mode");
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"variant", to_string(c.variant)},
                     {"iterations", c.iterations},
                     {"encoder_channels", c.encoder_channels},
                     {"warp_level", c.warp_level},
                     {"output_level", c.output_level},
                     {"decoder_width", c.decoder_width},
                     {"decoder_layers", c.decoder_layers},
                     {"adapter_channels", c.adapter_channels},
                     {"cost_volume_range", c.cost_volume_range},
                     {"bidirectional", c.bidirectional},
                     {"occlusion", c.occlusion},
                     {"bilateral", c.bilateral},
                     {"occ_upsampler", c.occ_upsampler},
                     {"sharing", to_string(c.sharing)},
                     {"bilateral_per_step", c.bilateral_per_step},
                     {"bilateral_window", c.bilateral_window},
                     {"bilateral_width", c.bilateral_width},
                     {"upsampler_width", c.upsampler_width},
                     {"upsampler_feature_channels", c.upsampler_feature_channels},
                     {"init_seed", c.init_seed}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  ModelConfig d;
  c = d;
  if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
  if (j.contains("sharing")) c.sharing = parse_sharing(j.at("sharing").get<std::string>());
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  opt("iterations", c.iterations);
  opt("encoder_channels", c.encoder_channels);
  opt("warp_level", c.warp_level);
  opt("output_level", c.output_level);
  opt("decoder_width", c.decoder_width);
  opt("decoder_layers", c.decoder_layers);
  opt("adapter_channels", c.adapter_channels);
  opt("cost_volume_range", c.cost_volume_range);
  opt("bidirectional", c.bidirectional);
  opt("occlusion", c.occlusion);
  opt("bilateral", c.bilateral);
  opt("occ_upsampler", c.occ_upsampler);
  opt("bilateral_per_step", c.bilateral_per_step);
  opt("bilateral_window", c.bilateral_window);
  opt("bilateral_width", c.bilateral_width);
  opt("upsampler_width", c.upsampler_width);
  opt("upsampler_feature_channels", c.upsampler_feature_channels);
  opt("init_seed", c.init_seed);
}

}  // namespace irr::models
