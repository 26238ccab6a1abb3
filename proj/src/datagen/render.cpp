#include "irr/datagen/render.hpp"

#include <algorithm>
#include <cmath>

namespace irr::datagen {

namespace {

int visible_layer(const MotionSpec& spec, const std::vector<Homography>& to_layer, double x,
                  double y) {
  for (int l = static_cast<int>(spec.layers.size()) - 1; l >= 0; --l) {
    const auto p = to_layer.empty() ? std::array<double, 2>{x, y} : to_layer[l].apply(x, y);
    if (spec.layers[l].covers(p[0], p[1])) return l;
  }
  return 0;
}

std::vector<Homography> inverses(const MotionSpec& spec) {
  std::vector<Homography> inv;
  for (const Layer& l : spec.layers) inv.push_back(l.motion.inverse());
  return inv;
}

void require_valid(const MotionSpec& spec) {
  if (spec.layers.empty() || spec.height < 1 || spec.width < 1) {
    throw core::InvalidArgument("motion spec needs a background layer and a positive size");
  }
}

}  // namespace

LayerIndexMap layer_index_map(const MotionSpec& spec, int frame) {
  require_valid(spec);
  if (frame != 1 && frame != 2) throw core::InvalidArgument("frame must be 1 or 2");
  const std::vector<Homography> inv = frame == 2 ? inverses(spec) : std::vector<Homography>{};
  LayerIndexMap m{spec.height, spec.width, {}};
  m.index.resize(static_cast<std::size_t>(spec.height) * spec.width);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      m.index[static_cast<std::size_t>(y) * spec.width + x] = visible_layer(spec, inv, x, y);
  return m;
}

RenderedPair render_pair(const MotionSpec& spec) {
  RenderedPair r;
  r.index1 = layer_index_map(spec, 1);
  r.index2 = layer_index_map(spec, 2);
  const std::vector<Homography> inv = inverses(spec);
  r.image1 = Image(spec.height, spec.width);
  r.image2 = Image(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const auto c1 = spec.layers[r.index1.at(y, x)].texture.eval(x, y);
      const int l2 = r.index2.at(y, x);
      const auto p = inv[l2].apply(x, y);
      const auto c2 = spec.layers[l2].texture.eval(p[0], p[1]);
      for (int c = 0; c < 3; ++c) {
        r.image1.at(c, y, x) = c1[c];
        r.image2.at(c, y, x) = c2[c];
      }
    }
  return r;
}

FlowField analytic_flow(const MotionSpec& spec, Direction direction) {
  const bool fw = direction == Direction::Forward;
  const LayerIndexMap idx = layer_index_map(spec, fw ? 1 : 2);
  const std::vector<Homography> maps = fw ? [&] {
    std::vector<Homography> m;
    for (const Layer& l : spec.layers) m.push_back(l.motion);
    return m;
  }() : inverses(spec);
  FlowField f(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const auto q = maps[idx.at(y, x)].apply(x, y);
      f.u(y, x) = q[0] - x;
      f.v(y, x) = q[1] - y;
    }
  return f;
}

OcclusionMap analytic_occlusion(const MotionSpec& spec, int frame) {
  if (frame != 1 && frame != 2) throw core::InvalidArgument("frame must be 1 or 2");
  const LayerIndexMap here = layer_index_map(spec, frame);
  const LayerIndexMap there = layer_index_map(spec, frame == 1 ? 2 : 1);
  std::vector<Homography> maps;
  if (frame == 1) {
    for (const Layer& l : spec.layers) maps.push_back(l.motion);
  } else {
    maps = inverses(spec);
  }
  OcclusionMap occ(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const int l = here.at(y, x);
      const auto q = maps[l].apply(x, y);
      bool occluded = q[0] < 0.0 || q[0] > spec.width - 1.0 || q[1] < 0.0 || q[1] > spec.height - 1.0;
      if (!occluded) {
        const int qx = static_cast<int>(std::floor(q[0] + 0.5));
        const int qy = static_cast<int>(std::floor(q[1] + 0.5));
        occluded = there.at(qy, qx) != l;
      }
      occ.at(y, x) = occluded ? 1.0 : 0.0;
    }
  return occ;
}

OcclusionMap mark_out_of_bounds(const OcclusionMap& occ, const FlowField& flow) {
  core::require_same_shape(occ.tensor(), core::Tensor::chw(1, flow.height(), flow.width()),
                           "mark_out_of_bounds");
  OcclusionMap out = occ;
  const int h = flow.height(), w = flow.width();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double tx = x + flow.u(y, x), ty = y + flow.v(y, x);
      if (tx < 0.0 || tx > w - 1.0 || ty < 0.0 || ty > h - 1.0) out.at(y, x) = 1.0;
    }
  return out;
}

SceneSample make_sample(std::uint64_t seed, const SceneConfig& config) {
  SceneSample s;
  s.seed = seed;
  s.spec = sample_scene(seed, config);
  RenderedPair r = render_pair(*s.spec);
  s.image1 = std::move(r.image1);
  s.image2 = std::move(r.image2);
  s.flow_fw = analytic_flow(*s.spec, Direction::Forward);
  s.flow_bw = analytic_flow(*s.spec, Direction::Backward);
  s.occ1 = analytic_occlusion(*s.spec, 1);
  s.occ2 = analytic_occlusion(*s.spec, 2);
  return s;
}

void quantize(SceneSample& sample) {
  for (Image* im : {&sample.image1, &sample.image2})
    for (double& v : im->tensor().values()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  for (FlowField* f : {&sample.flow_fw, &sample.flow_bw})
    for (double& v : f->tensor().values()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace irr::datagen
