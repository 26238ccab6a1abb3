#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "irr/core/fields.hpp"

namespace irr::metrics {

using core::FlowField;
using core::OcclusionMap;
using core::Tensor;

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Mean end-point error over valid pixels. `valid` is (1,H,W), nonzero = valid;
/// nullptr means every pixel. Throws when no pixel is valid.
double epe(const FlowField& pred, const FlowField& gt, const Tensor* valid = nullptr);

/// Fraction of valid pixels whose error exceeds 3 px and 5% of |gt|.
double fl_all(const FlowField& pred, const FlowField& gt, const Tensor* valid = nullptr);

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t tp = 0, fp = 0, fn = 0;
};

/// Binarizes pred at `threshold` (>= counts as occluded) and scores against gt.
/// When neither map has an occluded pixel the score is 1; when only one has,
/// it is 0.
F1Score occ_f1(const OcclusionMap& pred, const OcclusionMap& gt, double threshold = 0.5);
F1Score f1_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn, bool pred_empty,
                       bool gt_empty);

/// Area-average downsample by `factor`, threshold at 0.5, bilinear upsample to
/// the original size, threshold at 0.5.
OcclusionMap occlusion_round_trip(const OcclusionMap& gt, int factor);

struct OracleResult {
  F1Score score;
  OcclusionMap reconstructed;
};

/// Scores the resolution round trip of `gt` against itself. factor 1 is the identity.
OracleResult occ_resolution_oracle(const OcclusionMap& gt, int factor = 4);

}  // namespace irr::metrics
