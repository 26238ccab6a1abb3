#include "irr/datagen/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "irr/core/random.hpp"
#include "irr/core/tensor.hpp"

namespace irr::datagen {

using core::InvalidArgument;

Homography Homography::translation(double tx, double ty) {
  Homography h;
  h.m[2] = tx;
  h.m[5] = ty;
  return h;
}

Homography Homography::similarity(double cx, double cy, double angle, double scale, double tx,
                                  double ty) {
  const double c = scale * std::cos(angle), s = scale * std::sin(angle);
  // p' = c_center + sR (p - c_center) + t
  Homography h;
  h.m = {c, -s, cx - c * cx + s * cy + tx, s, c, cy - s * cx - c * cy + ty, 0, 0, 1};
  return h;
}

Homography Homography::operator*(const Homography& o) const {
  Homography r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += m[i * 3 + k] * o.m[k * 3 + j];
      r.m[i * 3 + j] = v;
    }
  return r;
}

double Homography::det() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::inverse() const {
  const double d = det();
  if (std::abs(d) <= 1e-12) throw InvalidArgument("homography is not invertible");
  Homography r;
  r.m = {(m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d,
         (m[1] * m[5] - m[2] * m[4]) / d, (m[5] * m[6] - m[3] * m[8]) / d,
         (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
         (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d,
         (m[0] * m[4] - m[1] * m[3]) / d};
  if (is_affine()) {
    // Keep the last row exact so affine motions stay affine.
    r.m[6] = r.m[7] = 0.0;
    r.m[8] = 1.0;
  }
  return r;
}

std::array<double, 2> Homography::apply(double x, double y) const {
  const double w = m[6] * x + m[7] * y + m[8];
  return {(m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w};
}

bool Sprite::contains(double x, double y) const {
  if (kind == ShapeKind::Ellipse) {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dx = x - cx, dy = y - cy;
    const double a = (c * dx + s * dy) / rx, b = (-s * dx + c * dy) / ry;
    return a * a + b * b <= 1.0;
  }
  // Even-odd crossing rule.
  bool inside = false;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& pi = vertices[i];
    const auto& pj = vertices[j];
    if ((pi[1] > y) != (pj[1] > y)) {
      const double xc = pj[0] + (y - pj[1]) * (pi[0] - pj[0]) / (pi[1] - pj[1]);
      if (x < xc) inside = !inside;
    }
  }
  return inside;
}

namespace {

double lattice(std::uint64_t seed, long ix, long iy, int c) {
  std::uint64_t h = core::combine_seeds(seed, static_cast<std::uint64_t>(ix) * 0x9E3779B1ull);
  h = core::combine_seeds(h, static_cast<std::uint64_t>(iy) * 0x85EBCA77ull + c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(std::uint64_t seed, double x, double y, int c) {
  const double fx = std::floor(x), fy = std::floor(y);
  const long ix = static_cast<long>(fx), iy = static_cast<long>(fy);
  const double tx = smooth(x - fx), ty = smooth(y - fy);
  const double v00 = lattice(seed, ix, iy, c), v10 = lattice(seed, ix + 1, iy, c);
  const double v01 = lattice(seed, ix, iy + 1, c), v11 = lattice(seed, ix + 1, iy + 1, c);
  return (1 - ty) * ((1 - tx) * v00 + tx * v10) + ty * ((1 - tx) * v01 + tx * v11);
}

}  // namespace

std::array<double, 3> Texture::eval(double x, double y) const {
  std::array<double, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double n = value_noise(seed, x / cell, y / cell, c) +
                     0.5 * value_noise(seed ^ 0xA5A5A5A5ull, 2.0 * x / cell, 2.0 * y / cell, c);
    // n lies in [0, 1.5]; centre it to [-1, 1].
    out[c] = std::clamp(base[c] + amplitude[c] * (n / 0.75 - 1.0), 0.0, 1.0);
  }
  return out;
}

void SceneConfig::validate() const {
  if (height < 2 || width < 2) throw InvalidArgument("scene size must be at least 2x2");
  if (min_objects < 0 || max_objects < min_objects) throw InvalidArgument("invalid object count range");
  if (radius_min <= 0 || radius_max < radius_min) throw InvalidArgument("invalid radius range");
  if (bg_scale_min <= 0 || bg_scale_max < bg_scale_min || fg_scale_min <= 0 ||
      fg_scale_max < fg_scale_min) {
    throw InvalidArgument("invalid scale range");
  }
  if (bg_max_translation < 0 || fg_max_translation < 0 || bg_max_rotation < 0 ||
      fg_max_rotation < 0 || projective < 0) {
    throw InvalidArgument("motion bounds must be >= 0");
  }
  if (texture_cell_min <= 0 || texture_cell_max < texture_cell_min) {
    throw InvalidArgument("invalid texture cell range");
  }
}

void to_json(nlohmann::json& j, const SceneConfig& c) {
  j = nlohmann::json{{"height", c.height},
                     {"width", c.width},
                     {"min_objects", c.min_objects},
                     {"max_objects", c.max_objects},
                     {"radius_min", c.radius_min},
                     {"radius_max", c.radius_max},
                     {"polygon_probability", c.polygon_probability},
                     {"bg_max_translation", c.bg_max_translation},
                     {"bg_max_rotation", c.bg_max_rotation},
                     {"bg_scale_min", c.bg_scale_min},
                     {"bg_scale_max", c.bg_scale_max},
                     {"fg_max_translation", c.fg_max_translation},
                     {"fg_max_rotation", c.fg_max_rotation},
                     {"fg_scale_min", c.fg_scale_min},
                     {"fg_scale_max", c.fg_scale_max},
                     {"projective", c.projective},
                     {"texture_cell_min", c.texture_cell_min},
                     {"texture_cell_max", c.texture_cell_max}};
}

void from_json(const nlohmann::json& j, SceneConfig& c) {
  c = SceneConfig{};
  for (const auto& [key, value] : j.items()) {
    nlohmann::json probe;
    to_json(probe, c);
    if (!probe.contains(key)) throw InvalidArgument("unknown scene config key '" + key + "'");
  }
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  opt("height", c.height);
  opt("width", c.width);
  opt("min_objects", c.min_objects);
  opt("max_objects", c.max_objects);
  opt("radius_min", c.radius_min);
  opt("radius_max", c.radius_max);
  opt("polygon_probability", c.polygon_probability);
  opt("bg_max_translation", c.bg_max_translation);
  opt("bg_max_rotation", c.bg_max_rotation);
  opt("bg_scale_min", c.bg_scale_min);
  opt("bg_scale_max", c.bg_scale_max);
  opt("fg_max_translation", c.fg_max_translation);
  opt("fg_max_rotation", c.fg_max_rotation);
  opt("fg_scale_min", c.fg_scale_min);
  opt("fg_scale_max", c.fg_scale_max);
  opt("projective", c.projective);
  opt("texture_cell_min", c.texture_cell_min);
  opt("texture_cell_max", c.texture_cell_max);
}

std::uint64_t config_hash(const SceneConfig& c) {
  return core::fnv1a64(nlohmann::json(c).dump());
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Homography draw_motion(core::Rng& rng, double cx, double cy, double max_t, double max_rot,
                       double smin, double smax, double projective) {
  const double angle = rng.uniform(-max_rot, max_rot) * kDeg;
  const double scale = rng.uniform(smin, smax);
  const double tx = rng.uniform(-max_t, max_t), ty = rng.uniform(-max_t, max_t);
  Homography h = Homography::similarity(cx, cy, angle, scale, tx, ty);
  if (projective > 0.0) {
    // Perspective terms applied about the motion centre so that the centre's
    // own displacement is unaffected.
    Homography p;
    p.m[6] = rng.uniform(-projective, projective);
    p.m[7] = rng.uniform(-projective, projective);
    p.m[8] = 1.0 - p.m[6] * cx - p.m[7] * cy;
    h = h * p;
  }
  return h;
}

bool usable(const Homography& h, int height, int width) {
  if (std::abs(h.det()) <= 1e-8) return false;
  if (h.is_affine()) return true;
  // The projective denominator must keep one sign over the frame.
  for (double x : {0.0, width - 1.0})
    for (double y : {0.0, height - 1.0})
      if (h.m[6] * x + h.m[7] * y + h.m[8] <= 0.1) return false;
  return true;
}

Texture draw_texture(core::Rng& rng, const SceneConfig& c) {
  Texture t;
  t.seed = rng.next_u64();
  t.cell = rng.uniform(c.texture_cell_min, c.texture_cell_max);
  for (int k = 0; k < 3; ++k) {
    t.base[k] = rng.uniform(0.2, 0.8);
    t.amplitude[k] = rng.uniform(0.15, 0.35);
  }
  return t;
}

Sprite draw_sprite(core::Rng& rng, const SceneConfig& c) {
  const double dim = std::min(c.height, c.width);
  Sprite s;
  s.cx = rng.uniform(0.0, c.width - 1.0);
  s.cy = rng.uniform(0.0, c.height - 1.0);
  s.rx = rng.uniform(c.radius_min, c.radius_max) * dim;
  s.ry = rng.uniform(c.radius_min, c.radius_max) * dim;
  s.angle = rng.uniform(0.0, std::numbers::pi);
  if (rng.uniform() < c.polygon_probability) {
    s.kind = ShapeKind::Polygon;
    const int n = rng.uniform_int(5, 9);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < n; ++i) {
      const double a = phase + 2.0 * std::numbers::pi * i / n;
      const double r = rng.uniform(0.55, 1.0);
      s.vertices.push_back({s.cx + r * s.rx * std::cos(a), s.cy + r * s.ry * std::sin(a)});
    }
  }
  return s;
}

}  // namespace

MotionSpec sample_scene(std::uint64_t seed, const SceneConfig& c) {
  c.validate();
  core::Rng rng(core::mix_seed(seed));
  MotionSpec spec;
  spec.height = c.height;
  spec.width = c.width;
  const int k = rng.uniform_int(c.min_objects, c.max_objects);
  constexpr int kRetries = 100;
  for (int l = 0; l <= k; ++l) {
    Layer layer;
    layer.texture = draw_texture(rng, c);
    double cx = (c.width - 1) / 2.0, cy = (c.height - 1) / 2.0;
    if (l > 0) {
      layer.sprite = draw_sprite(rng, c);
      cx = layer.sprite->cx;
      cy = layer.sprite->cy;
    }
    const bool bg = l == 0;
    int tries = 0;
    do {
      if (++tries > kRetries) throw InvalidArgument("could not draw an invertible motion");
      layer.motion = draw_motion(rng, cx, cy, bg ? c.bg_max_translation : c.fg_max_translation,
                                 bg ? c.bg_max_rotation : c.fg_max_rotation,
                                 bg ? c.bg_scale_min : c.fg_scale_min,
                                 bg ? c.bg_scale_max : c.fg_scale_max, c.projective);
    } while (!usable(layer.motion, c.height, c.width));
    spec.layers.push_back(std::move(layer));
  }
  return spec;
}

double forward_flow_bound(const SceneConfig& c) {
  auto rho = [](double smin, double smax, double max_rot_deg) {
    const double ct = std::cos(std::min(max_rot_deg, 180.0) * kDeg);
    double best = 0.0;
    for (double s : {smin, smax}) best = std::max(best, std::sqrt(s * s - 2.0 * s * ct + 1.0));
    return best;
  };
  const double half_diag = 0.5 * std::hypot(c.width - 1.0, c.height - 1.0);
  const double bg = rho(c.bg_scale_min, c.bg_scale_max, c.bg_max_rotation) * half_diag +
                    c.bg_max_translation;
  double fg = 0.0;
  if (c.max_objects > 0) {
    fg = rho(c.fg_scale_min, c.fg_scale_max, c.fg_max_rotation) * 2.0 * half_diag +
         c.fg_max_translation;
  }
  return std::max(bg, fg);
}

}  // namespace irr::datagen
