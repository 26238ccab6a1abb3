#include "irr/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "irr/core/ops.hpp"

namespace irr::losses {

using core::InvalidArgument;

Var l21_sum(const Var& pred, const Tensor& gt) {
  if (pred.value().rank() != 3 || pred.channels() != 2) {
    throw InvalidArgument("flow loss expects (2,H,W) predictions");
  }
  core::require_same_shape(pred.value(), gt, "flow_loss");
  const Tensor& p = pred.value();
  const int h = p.height(), w = p.width();
  double s = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double du = p(0, y, x) - gt(0, y, x), dv = p(1, y, x) - gt(1, y, x);
      s += std::sqrt(du * du + dv * dv);
    }
  return Var::make(Tensor::scalar(s), {pred}, [pp = pred.node(), gt](core::detail::Node& self) {
    const Tensor& p = pp->value;
    Tensor& g = pp->grad_buffer();
    const double gs = self.grad[0];
    for (int y = 0; y < p.height(); ++y)
      for (int x = 0; x < p.width(); ++x) {
        const double du = p(0, y, x) - gt(0, y, x), dv = p(1, y, x) - gt(1, y, x);
        const double n = std::sqrt(du * du + dv * dv);
        if (n == 0.0) continue;
        g(0, y, x) += gs * du / n;
        g(1, y, x) += gs * dv / n;
      }
  });
}

Var flow_loss(const Var& pred_fw, const Var& pred_bw, const Tensor* gt_fw, const Tensor* gt_bw) {
  std::vector<Var> parts;
  if (pred_fw.defined() && gt_fw) parts.push_back(l21_sum(pred_fw, *gt_fw));
  if (pred_bw.defined() && gt_bw) parts.push_back(l21_sum(pred_bw, *gt_bw));
  if (parts.empty()) throw InvalidArgument("flow_loss: no direction has both prediction and GT");
  if (parts.size() == 1) return parts[0];
  return core::scale(core::add(parts[0], parts[1]), 0.5);
}

OccWeights occ_weights(const Tensor& pred, const Tensor& gt) {
  core::require_same_shape(pred, gt, "occ_weights");
  const double n = static_cast<double>(pred.size());
  double sp = 0.0, sg = 0.0;
  for (double v : pred.values()) sp += v;
  for (double v : gt.values()) sg += v;
  return {n / std::max(sp + sg, 1.0), n / std::max((n - sp) + (n - sg), 1.0)};
}

Var weighted_bce(const Var& pred, const Tensor& gt) {
  if (pred.value().rank() != 3 || pred.channels() != 1) {
    throw InvalidArgument("occlusion loss expects (1,H,W) predictions");
  }
  core::require_same_shape(pred.value(), gt, "occ_loss");
  const Var p = core::clamp(pred, kProbEps, 1.0 - kProbEps);
  const Tensor& pv = p.value();
  const double n = static_cast<double>(pv.size());
  double sp = 0.0, sg = 0.0, pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    sp += pv[i];
    sg += gt[i];
    pos += gt[i] * std::log(pv[i]);
    neg += (1.0 - gt[i]) * std::log(1.0 - pv[i]);
  }
  const double dw = sp + sg, dwb = (n - sp) + (n - sg);
  const double w = n / std::max(dw, 1.0), wb = n / std::max(dwb, 1.0);
  const double loss = -(w * pos + wb * neg);
  // Derivatives of the weights w.r.t. any single prediction; zero where clamped.
  const double dw_dp = dw > 1.0 ? -n / (dw * dw) : 0.0;
  const double dwb_dp = dwb > 1.0 ? n / (dwb * dwb) : 0.0;
  return Var::make(Tensor::scalar(loss), {p},
                   [pp = p.node(), gt, w, wb, pos, neg, dw_dp, dwb_dp](core::detail::Node& self) {
                     const Tensor& pv = pp->value;
                     Tensor& g = pp->grad_buffer();
                     const double gs = self.grad[0];
                     const double shared = -pos * dw_dp - neg * dwb_dp;
                     for (std::size_t i = 0; i < pv.size(); ++i) {
                       const double direct = -(w * gt[i] / pv[i] - wb * (1.0 - gt[i]) / (1.0 - pv[i]));
                       g[i] += gs * (direct + shared);
                     }
                   });
}

Var occ_loss(const Var& pred1, const Var& pred2, const Tensor* gt1, const Tensor* gt2) {
  std::vector<Var> parts;
  if (pred1.defined() && gt1) parts.push_back(weighted_bce(pred1, *gt1));
  if (pred2.defined() && gt2) parts.push_back(weighted_bce(pred2, *gt2));
  if (parts.empty()) throw InvalidArgument("occ_loss: no frame has both prediction and GT");
  if (parts.size() == 1) return parts[0];
  return core::scale(core::add(parts[0], parts[1]), 0.5);
}

double adaptive_lambda(double l_flow, double l_occ) { return l_occ > 0.0 ? l_flow / l_occ : 0.0; }

double LossBreakdown::recompute_total() const {
  if (iterations < 1) return 0.0;
  double s = 0.0;
  for (const LossTerm& t : terms) s += t.alpha * (t.flow + (t.has_occ ? t.lambda * t.occ : 0.0));
  return s / iterations;
}

namespace {

LossTerm make_term(int i, int s, double alpha, double flow, double occ, bool has_occ) {
  if (flow < 0.0 || (has_occ && occ < 0.0)) throw InvalidArgument("loss components must be >= 0");
  LossTerm t{i, s, alpha, flow, has_occ ? occ : 0.0, 0.0, has_occ};
  if (has_occ) t.lambda = adaptive_lambda(flow, occ);
  return t;
}

}  // namespace

Objective total_loss_flownet(const std::vector<std::vector<TermInput>>& grid,
                             const std::vector<double>& alpha) {
  if (grid.empty()) throw InvalidArgument("total loss needs at least one iteration");
  Objective out;
  out.breakdown.iterations = static_cast<int>(grid.size());
  Var acc;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != alpha.size()) {
      throw InvalidArgument("alpha has " + std::to_string(alpha.size()) + " entries but iteration " +
                            std::to_string(i + 1) + " has " + std::to_string(grid[i].size()) +
                            " scales");
    }
    for (std::size_t s = 0; s < alpha.size(); ++s) {
      const TermInput& in = grid[i][s];
      const bool has_occ = in.occ.defined();
      LossTerm t = make_term(static_cast<int>(i) + 1, static_cast<int>(s) + 1, alpha[s],
                             in.flow.value()[0], has_occ ? in.occ.value()[0] : 0.0, has_occ);
      Var cell = in.flow;
      if (has_occ) cell = core::add(cell, core::scale(in.occ, t.lambda));
      cell = core::scale(cell, alpha[s]);
      acc = acc.defined() ? core::add(acc, cell) : cell;
      out.breakdown.terms.push_back(t);
    }
  }
  out.total = core::scale(acc, 1.0 / static_cast<double>(grid.size()));
  out.breakdown.total = out.total.value()[0];
  return out;
}

Objective total_loss_pwc(const std::vector<TermInput>& levels, const std::vector<double>& alpha) {
  if (levels.size() != alpha.size()) {
    throw InvalidArgument("alpha has " + std::to_string(alpha.size()) + " entries for " +
                          std::to_string(levels.size()) + " levels");
  }
  if (levels.empty()) throw InvalidArgument("total loss needs at least one level");
  Objective out;
  out.breakdown.iterations = static_cast<int>(levels.size());
  Var acc;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const TermInput& in = levels[i];
    const bool has_occ = in.occ.defined();
    LossTerm t = make_term(static_cast<int>(i) + 1, static_cast<int>(i) + 1, alpha[i],
                           in.flow.value()[0], has_occ ? in.occ.value()[0] : 0.0, has_occ);
    Var cell = in.flow;
    if (has_occ) cell = core::add(cell, core::scale(in.occ, t.lambda));
    cell = core::scale(cell, alpha[i]);
    acc = acc.defined() ? core::add(acc, cell) : cell;
    out.breakdown.terms.push_back(t);
  }
  out.total = core::scale(acc, 1.0 / static_cast<double>(levels.size()));
  out.breakdown.total = out.total.value()[0];
  return out;
}

LossBreakdown aggregate(const std::vector<std::vector<std::pair<double, double>>>& grid,
                        const std::vector<double>& alpha) {
  if (grid.empty()) throw InvalidArgument("total loss needs at least one iteration");
  LossBreakdown b;
  b.iterations = static_cast<int>(grid.size());
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i].size() != alpha.size()) throw InvalidArgument("alpha length mismatch");
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      const auto [lf, lo] = grid[i][k];
      LossTerm t = make_term(static_cast<int>(i) + 1, static_cast<int>(k) + 1, alpha[k], lf, lo,
                             lo >= 0.0);
      s += t.alpha * (t.flow + t.lambda * t.occ);
      b.terms.push_back(t);
    }
  }
  b.total = s / b.iterations;
  return b;
}

}  // namespace irr::losses
