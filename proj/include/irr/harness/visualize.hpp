#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "irr/core/fields.hpp"

namespace irr::harness {

/// Colour-wheel coding of a flow field as interleaved RGB bytes: hue encodes
/// direction, saturation the magnitude relative to `max_magnitude` (<= 0 picks
/// the field's own maximum).
std::vector<std::uint8_t> flow_to_rgb(const core::FlowField& flow, double max_magnitude = 0.0);

void write_flow_png(const std::filesystem::path& path, const core::FlowField& flow,
                    double max_magnitude = 0.0);
/// Grayscale, white = occluded.
void write_occlusion_png(const std::filesystem::path& path, const core::OcclusionMap& occ);

}  // namespace irr::harness
