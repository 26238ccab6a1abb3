#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

namespace irr::datagen {

/// 3x3 projective matrix acting on pixel coordinates (x, y, 1), row-major.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty);
  /// Rotation by `angle` (radians) and isotropic `scale` about (cx, cy),
  /// followed by a translation (tx, ty).
  static Homography similarity(double cx, double cy, double angle, double scale, double tx,
                               double ty);

  Homography operator*(const Homography& o) const;
  double det() const;
  Homography inverse() const;
  std::array<double, 2> apply(double x, double y) const;
  bool is_affine() const { return m[6] == 0.0 && m[7] == 0.0 && m[8] == 1.0; }

  friend bool operator==(const Homography&, const Homography&) = default;
};

enum class ShapeKind { Ellipse, Polygon };

/// Binary alpha of a foreground layer in frame-1 coordinates.
struct Sprite {
  ShapeKind kind = ShapeKind::Ellipse;
  double cx = 0, cy = 0;
  double rx = 1, ry = 1, angle = 0;
  /// Polygon vertices in absolute frame-1 coordinates (Polygon only).
  std::vector<std::array<double, 2>> vertices;

  bool contains(double x, double y) const;

  friend bool operator==(const Sprite&, const Sprite&) = default;
};

/// Two-octave value noise around a base colour, evaluated at layer points.
struct Texture {
  std::uint64_t seed = 0;
  double cell = 6.0;
  std::array<double, 3> base{0.5, 0.5, 0.5};
  std::array<double, 3> amplitude{0.3, 0.3, 0.3};

  std::array<double, 3> eval(double x, double y) const;

  friend bool operator==(const Texture&, const Texture&) = default;
};

/// One motion layer. Layer 0 is the background and has no sprite.
struct Layer {
  Homography motion;
  std::optional<Sprite> sprite;
  Texture texture;

  /// Whether the layer point (frame-1 coordinates) belongs to this layer.
  bool covers(double x, double y) const { return !sprite || sprite->contains(x, y); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Layers ordered back to front; a later layer is in front of an earlier one.
struct MotionSpec {
  int height = 0;
  int width = 0;
  std::vector<Layer> layers;

  friend bool operator==(const MotionSpec&, const MotionSpec&) = default;
};

/// Scene distribution. Radii are fractions of min(height, width); angles in degrees.
struct SceneConfig {
  int height = 48;
  int width = 64;
  int min_objects = 1;
  int max_objects = 3;
  double radius_min = 0.15;
  double radius_max = 0.32;
  double polygon_probability = 0.5;

  double bg_max_translation = 2.0;
  double bg_max_rotation = 2.0;
  double bg_scale_min = 0.97;
  double bg_scale_max = 1.03;

  double fg_max_translation = 5.0;
  double fg_max_rotation = 8.0;
  double fg_scale_min = 0.93;
  double fg_scale_max = 1.07;

  /// Bound on the perspective coefficients m[6], m[7]; 0 keeps every motion affine.
  double projective = 0.0;

  double texture_cell_min = 3.0;
  double texture_cell_max = 8.0;

  void validate() const;
};

void to_json(nlohmann::json& j, const SceneConfig& c);
void from_json(const nlohmann::json& j, SceneConfig& c);

/// FNV-1a of the canonical JSON serialization.
std::uint64_t config_hash(const SceneConfig& c);

/// Deterministic scene draw; non-invertible motions are redrawn (bounded retries).
MotionSpec sample_scene(std::uint64_t seed, const SceneConfig& config);

/// Upper bound on |u| and |v| of the forward flow of any affine scene drawn
/// from `config`: rho_max * r_max + t_max, with rho = sqrt(s^2 - 2 s cos(theta) + 1)
/// the largest stretch of (sR - I) and r_max the largest distance between a
/// pixel and a motion centre.
double forward_flow_bound(const SceneConfig& config);

}  // namespace irr::datagen
