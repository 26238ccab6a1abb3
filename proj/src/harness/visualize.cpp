#include "irr/harness/visualize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "irr/datagen/dataset_io.hpp"

namespace irr::harness {

namespace {

// Middlebury colour wheel: red-yellow-green-cyan-blue-magenta segments.
std::vector<std::array<double, 3>> make_wheel() {
  const int segments[6] = {15, 6, 4, 11, 13, 6};
  std::vector<std::array<double, 3>> wheel;
  for (int i = 0; i < segments[0]; ++i) wheel.push_back({255, 255.0 * i / segments[0], 0});
  for (int i = 0; i < segments[1]; ++i) wheel.push_back({255 - 255.0 * i / segments[1], 255, 0});
  for (int i = 0; i < segments[2]; ++i) wheel.push_back({0, 255, 255.0 * i / segments[2]});
  for (int i = 0; i < segments[3]; ++i) wheel.push_back({0, 255 - 255.0 * i / segments[3], 255});
  for (int i = 0; i < segments[4]; ++i) wheel.push_back({255.0 * i / segments[4], 0, 255});
  for (int i = 0; i < segments[5]; ++i) wheel.push_back({255, 0, 255 - 255.0 * i / segments[5]});
  return wheel;
}

}  // namespace

std::vector<std::uint8_t> flow_to_rgb(const core::FlowField& flow, double max_magnitude) {
  static const auto wheel = make_wheel();
  const int n = static_cast<int>(wheel.size());
  const int h = flow.height(), w = flow.width();
  if (max_magnitude <= 0.0) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) max_magnitude = std::max(max_magnitude, std::hypot(flow.u(y, x), flow.v(y, x)));
  }
  if (max_magnitude <= 0.0) max_magnitude = 1.0;
  std::vector<std::uint8_t> px(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double u = flow.u(y, x) / max_magnitude, v = flow.v(y, x) / max_magnitude;
      const double rad = std::min(std::hypot(u, v), 1.0);
      const double a = std::atan2(-v, -u) / std::numbers::pi;
      const double fk = (a + 1.0) / 2.0 * (n - 1);
      const int k0 = static_cast<int>(std::floor(fk));
      const int k1 = (k0 + 1) % n;
      const double f = fk - k0;
      for (int c = 0; c < 3; ++c) {
        const double col = ((1 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
        const double out = 1.0 - rad * (1.0 - col);
        px[(static_cast<std::size_t>(y) * w + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(255.0 * out));
      }
    }
  return px;
}

void write_flow_png(const std::filesystem::path& path, const core::FlowField& flow,
                    double max_magnitude) {
  datagen::write_png_bytes(path, flow.width(), flow.height(), 3, flow_to_rgb(flow, max_magnitude));
}

void write_occlusion_png(const std::filesystem::path& path, const core::OcclusionMap& occ) {
  std::vector<std::uint8_t> px;
  px.reserve(static_cast<std::size_t>(occ.height()) * occ.width());
  for (int y = 0; y < occ.height(); ++y)
    for (int x = 0; x < occ.width(); ++x)
      px.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(occ.at(y, x), 0.0, 1.0))));
  datagen::write_png_bytes(path, occ.width(), occ.height(), 1, px);
}

}  // namespace irr::harness
