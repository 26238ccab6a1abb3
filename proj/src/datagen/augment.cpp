#include "irr/datagen/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "irr/core/core_ops.hpp"
#include "irr/core/random.hpp"

namespace irr::datagen {

using core::InvalidArgument;
using core::Tensor;

void to_json(nlohmann::json& j, const AugmentConfig& c) {
  j = nlohmann::json{{"scale_min", c.scale_min},       {"scale_max", c.scale_max},
                     {"crop_height", c.crop_height},   {"crop_width", c.crop_width},
                     {"flip_probability", c.flip_probability},
                     {"brightness", c.brightness},     {"contrast", c.contrast},
                     {"noise_std", c.noise_std}};
}

void from_json(const nlohmann::json& j, AugmentConfig& c) {
  c = AugmentConfig{};
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  opt("scale_min", c.scale_min);
  opt("scale_max", c.scale_max);
  opt("crop_height", c.crop_height);
  opt("crop_width", c.crop_width);
  opt("flip_probability", c.flip_probability);
  opt("brightness", c.brightness);
  opt("contrast", c.contrast);
  opt("noise_std", c.noise_std);
}

namespace {

Tensor flip_tensor(const Tensor& t, bool negate_u) {
  Tensor out = t;
  const int w = t.width();
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < t.height(); ++y)
      for (int x = 0; x < w; ++x) {
        const double v = t(c, y, w - 1 - x);
        out(c, y, x) = (negate_u && c == 0) ? -v : v;
      }
  return out;
}

Tensor nearest_resize(const Tensor& t, int h, int w) {
  Tensor out = Tensor::chw(t.channels(), h, w);
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < h; ++y) {
      const int sy = std::min(static_cast<int>((y + 0.5) * t.height() / h), t.height() - 1);
      for (int x = 0; x < w; ++x) {
        const int sx = std::min(static_cast<int>((x + 0.5) * t.width() / w), t.width() - 1);
        out(c, y, x) = t(c, sy, sx);
      }
    }
  return out;
}

Tensor crop_tensor(const Tensor& t, int y0, int x0, int h, int w) {
  Tensor out = Tensor::chw(t.channels(), h, w);
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out(c, y, x) = t(c, y0 + y, x0 + x);
  return out;
}

SceneSample geometric_copy(const SceneSample& s) {
  SceneSample out;
  out.id = s.id;
  out.seed = s.seed;
  // A transformed sample no longer matches its scene description.
  return out;
}

}  // namespace

SceneSample flip_horizontal(const SceneSample& s) {
  SceneSample out = geometric_copy(s);
  out.image1 = Image(flip_tensor(s.image1.tensor(), false));
  out.image2 = Image(flip_tensor(s.image2.tensor(), false));
  out.flow_fw = FlowField(flip_tensor(s.flow_fw.tensor(), true));
  out.flow_bw = FlowField(flip_tensor(s.flow_bw.tensor(), true));
  out.occ1 = OcclusionMap(flip_tensor(s.occ1.tensor(), false));
  out.occ2 = OcclusionMap(flip_tensor(s.occ2.tensor(), false));
  if (s.valid) out.valid = flip_tensor(*s.valid, false);
  return out;
}

SceneSample scale_sample(const SceneSample& s, double factor) {
  if (!(factor > 0.0)) throw InvalidArgument("scale factor must be positive");
  const int h = std::max(1, static_cast<int>(std::lround(s.image1.height() * factor)));
  const int w = std::max(1, static_cast<int>(std::lround(s.image1.width() * factor)));
  SceneSample out = geometric_copy(s);
  auto bilinear = [&](const Tensor& t) {
    return core::resize_bilinear(core::constant(t), h, w).value();
  };
  auto flow = [&](const FlowField& f) {
    return FlowField(core::resize_flow(core::constant(f.tensor()), h, w).value());
  };
  out.image1 = Image(bilinear(s.image1.tensor()));
  out.image2 = Image(bilinear(s.image2.tensor()));
  out.flow_fw = flow(s.flow_fw);
  out.flow_bw = flow(s.flow_bw);
  out.occ1 = OcclusionMap(nearest_resize(s.occ1.tensor(), h, w));
  out.occ2 = OcclusionMap(nearest_resize(s.occ2.tensor(), h, w));
  if (s.valid) out.valid = nearest_resize(*s.valid, h, w);
  return out;
}

SceneSample crop_sample(const SceneSample& s, int y0, int x0, int h, int w) {
  if (h < 1 || w < 1 || y0 < 0 || x0 < 0 || y0 + h > s.image1.height() ||
      x0 + w > s.image1.width()) {
    throw InvalidArgument("crop " + std::to_string(h) + "x" + std::to_string(w) +
                          " does not fit the image");
  }
  SceneSample out = geometric_copy(s);
  out.image1 = Image(crop_tensor(s.image1.tensor(), y0, x0, h, w));
  out.image2 = Image(crop_tensor(s.image2.tensor(), y0, x0, h, w));
  out.flow_fw = FlowField(crop_tensor(s.flow_fw.tensor(), y0, x0, h, w));
  out.flow_bw = FlowField(crop_tensor(s.flow_bw.tensor(), y0, x0, h, w));
  out.occ1 = OcclusionMap(crop_tensor(s.occ1.tensor(), y0, x0, h, w));
  out.occ2 = OcclusionMap(crop_tensor(s.occ2.tensor(), y0, x0, h, w));
  if (s.valid) out.valid = crop_tensor(*s.valid, y0, x0, h, w);
  return out;
}

SceneSample augment(const SceneSample& s, std::uint64_t seed, const AugmentConfig& c) {
  if (c.scale_min <= 0.0 || c.scale_max < c.scale_min) throw InvalidArgument("invalid scale range");
  core::Rng rng(core::mix_seed(seed ^ 0x5DEECE66Dull));
  SceneSample out = s;
  const double factor = rng.uniform(c.scale_min, c.scale_max);
  if (factor != 1.0) out = scale_sample(out, factor);
  if (c.crop_height > 0 || c.crop_width > 0) {
    const int ch = c.crop_height > 0 ? c.crop_height : out.image1.height();
    const int cw = c.crop_width > 0 ? c.crop_width : out.image1.width();
    if (ch > out.image1.height() || cw > out.image1.width()) {
      throw InvalidArgument("crop larger than the (scaled) image");
    }
    const int y0 = rng.uniform_int(0, out.image1.height() - ch);
    const int x0 = rng.uniform_int(0, out.image1.width() - cw);
    out = crop_sample(out, y0, x0, ch, cw);
  }
  if (rng.uniform() < c.flip_probability) out = flip_horizontal(out);
  out.occ1 = mark_out_of_bounds(out.occ1, out.flow_fw);
  out.occ2 = mark_out_of_bounds(out.occ2, out.flow_bw);

  const double shift = c.brightness > 0.0 ? rng.uniform(-c.brightness, c.brightness) : 0.0;
  const double gain = c.contrast > 0.0 ? rng.uniform(1.0 - c.contrast, 1.0 + c.contrast) : 1.0;
  if (shift != 0.0 || gain != 1.0 || c.noise_std > 0.0) {
    for (Image* im : {&out.image1, &out.image2})
      for (double& v : im->tensor().values()) {
        double t = (v - 0.5) * gain + 0.5 + shift;
        if (c.noise_std > 0.0) t += c.noise_std * rng.normal();
        v = std::clamp(t, 0.0, 1.0);
      }
  }
  return out;
}

}  // namespace irr::datagen
