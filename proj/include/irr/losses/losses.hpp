#pragma once

#include <utility>
#include <vector>

#include "irr/core/autodiff.hpp"

namespace irr::losses {

using core::Tensor;
using core::Var;

/// Probabilities are clamped into [kProbEps, 1 - kProbEps] inside logarithms.
inline constexpr double kProbEps = 1e-7;

/// Sum over pixels of the Euclidean norm of (pred - gt); both (2,H,W).
/// Subgradient zero where the error vanishes.
Var l21_sum(const Var& pred, const Tensor& gt);

/// Flow loss over the directions that have both a prediction and ground truth:
/// the per-direction L2,1 sums averaged over those directions (1/2 for two,
/// 1 for one). Pass nullptr / an undefined Var for a missing direction.
Var flow_loss(const Var& pred_fw, const Var& pred_bw, const Tensor* gt_fw, const Tensor* gt_bw);

struct OccWeights {
  double w = 0.0;
  double w_bar = 0.0;
};

/// w = HW / (sum pred + sum gt), w_bar = HW / (sum(1-pred) + sum(1-gt)), each
/// denominator clamped below by 1.
OccWeights occ_weights(const Tensor& pred, const Tensor& gt);

/// Class-weighted binary cross-entropy of one frame, with the weights computed
/// from the clamped prediction (and differentiated through).
Var weighted_bce(const Var& pred, const Tensor& gt);

/// Mean of weighted_bce over the frames that have both prediction and GT.
Var occ_loss(const Var& pred1, const Var& pred2, const Tensor* gt1, const Tensor* gt2);

/// l_flow / l_occ, or 0 when l_occ is 0.
double adaptive_lambda(double l_flow, double l_occ);

/// Loss pieces of one (iteration, scale) cell. `occ` may be undefined.
struct TermInput {
  Var flow;
  Var occ;
};

struct LossTerm {
  int iteration = 0;
  int scale = 0;
  double alpha = 1.0;
  double flow = 0.0;
  double occ = 0.0;
  double lambda = 0.0;
  bool has_occ = false;
};

struct LossBreakdown {
  std::vector<LossTerm> terms;
  int iterations = 0;
  double total = 0.0;

  /// (1/N) sum alpha * (flow + lambda * occ), recomputed from the terms.
  double recompute_total() const;
};

struct Objective {
  Var total;
  LossBreakdown breakdown;
};

/// (1/N) sum_i sum_s alpha_s (l_flow^{i,s} + lambda^{i,s} l_occ^{i,s}), lambda
/// per cell and held constant for gradients. grid[i][s]; alpha.size() == S.
Objective total_loss_flownet(const std::vector<std::vector<TermInput>>& grid,
                             const std::vector<double>& alpha);

/// (1/N) sum_i alpha_i (l_flow^i + lambda^i l_occ^i) over N levels.
Objective total_loss_pwc(const std::vector<TermInput>& levels, const std::vector<double>& alpha);

/// Same aggregation on plain numbers: grid[i][s] = (l_flow, l_occ), with a
/// negative l_occ meaning "no occlusion term".
LossBreakdown aggregate(const std::vector<std::vector<std::pair<double, double>>>& grid,
                        const std::vector<double>& alpha);

}  // namespace irr::losses
