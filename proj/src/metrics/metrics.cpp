#include "irr/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "irr/core/core_ops.hpp"

namespace irr::metrics {

using core::InvalidArgument;

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

namespace {

void check_flow_pair(const FlowField& pred, const FlowField& gt, const Tensor* valid,
                     const char* what) {
  core::require_same_shape(pred.tensor(), gt.tensor(), what);
  if (valid && (valid->rank() != 3 || valid->channels() != 1 || valid->height() != gt.height() ||
                valid->width() != gt.width())) {
    throw InvalidArgument(std::string(what) + ": valid mask shape mismatch");
  }
}

bool is_valid(const Tensor* valid, int y, int x) { return !valid || (*valid)(0, y, x) != 0.0; }

double error_norm(const FlowField& pred, const FlowField& gt, int y, int x) {
  return std::hypot(pred.u(y, x) - gt.u(y, x), pred.v(y, x) - gt.v(y, x));
}

}  // namespace

double epe(const FlowField& pred, const FlowField& gt, const Tensor* valid) {
  check_flow_pair(pred, gt, valid, "epe");
  CompensatedSum s;
  std::size_t n = 0;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x) {
      if (!is_valid(valid, y, x)) continue;
      s.add(error_norm(pred, gt, y, x));
      ++n;
    }
  if (n == 0) throw InvalidArgument("epe: no valid pixels");
  return s.value() / static_cast<double>(n);
}

double fl_all(const FlowField& pred, const FlowField& gt, const Tensor* valid) {
  check_flow_pair(pred, gt, valid, "fl_all");
  std::size_t n = 0, out = 0;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x) {
      if (!is_valid(valid, y, x)) continue;
      ++n;
      const double e = error_norm(pred, gt, y, x);
      const double mag = std::hypot(gt.u(y, x), gt.v(y, x));
      if (e > 3.0 && e > 0.05 * mag) ++out;
    }
  if (n == 0) throw InvalidArgument("fl_all: no valid pixels");
  return static_cast<double>(out) / static_cast<double>(n);
}

F1Score f1_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn, bool pred_empty,
                       bool gt_empty) {
  F1Score s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  if (pred_empty && gt_empty) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  if (pred_empty || gt_empty || tp == 0) return s;
  s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

F1Score occ_f1(const OcclusionMap& pred, const OcclusionMap& gt, double threshold) {
  core::require_same_shape(pred.tensor(), gt.tensor(), "occ_f1");
  std::int64_t tp = 0, fp = 0, fn = 0, pred_pos = 0, gt_pos = 0;
  const auto& p = pred.tensor().values();
  const auto& g = gt.tensor().values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pp = p[i] >= threshold;
    const bool gp = g[i] >= 0.5;
    pred_pos += pp;
    gt_pos += gp;
    if (pp && gp) ++tp;
    else if (pp) ++fp;
    else if (gp) ++fn;
  }
  return f1_from_counts(tp, fp, fn, pred_pos == 0, gt_pos == 0);
}

OcclusionMap occlusion_round_trip(const OcclusionMap& gt, int factor) {
  if (factor < 1) throw InvalidArgument("occlusion_round_trip: factor must be >= 1");
  if (factor == 1) return gt;
  const int h = gt.height(), w = gt.width();
  Tensor small = core::area_downsample(gt.tensor(), factor);
  for (double& v : small.values()) v = v >= 0.5 ? 1.0 : 0.0;
  const int sh = small.height(), sw = small.width();
  // align_corners = false bilinear taps, matching core::resize_bilinear.
  auto taps = [](int in, int out, int o, int& lo, int& hi, double& frac) {
    double s = (o + 0.5) * static_cast<double>(in) / out - 0.5;
    if (s < 0.0) s = 0.0;
    lo = std::min(static_cast<int>(std::floor(s)), in - 1);
    hi = std::min(lo + 1, in - 1);
    frac = s - lo;
  };
  OcclusionMap out(h, w);
  for (int y = 0; y < h; ++y) {
    int y0, y1;
    double fy;
    taps(sh, h, y, y0, y1, fy);
    for (int x = 0; x < w; ++x) {
      int x0, x1;
      double fx;
      taps(sw, w, x, x0, x1, fx);
      const double v = (1 - fy) * ((1 - fx) * small(0, y0, x0) + fx * small(0, y0, x1)) +
                       fy * ((1 - fx) * small(0, y1, x0) + fx * small(0, y1, x1));
      out.at(y, x) = v >= 0.5 ? 1.0 : 0.0;
    }
  }
  return out;
}

OracleResult occ_resolution_oracle(const OcclusionMap& gt, int factor) {
  OracleResult r{{}, occlusion_round_trip(gt, factor)};
  r.score = occ_f1(r.reconstructed, gt);
  return r;
}

}  // namespace irr::metrics
