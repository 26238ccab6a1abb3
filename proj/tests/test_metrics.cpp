#include <gtest/gtest.h>

#include <algorithm>

#include "irr/metrics/metrics.hpp"
#include "irr/metrics/report.hpp"
#include "oracles.hpp"

namespace irr {
namespace {

using core::FlowField;
using core::OcclusionMap;
using core::Rng;
using core::Tensor;
using testing::random_tensor;

FlowField random_flow(Rng& rng, int h, int w, double scale) {
  return FlowField(random_tensor(rng, {2, h, w}, -scale, scale));
}

OcclusionMap random_occ(Rng& rng, int h, int w, double p) {
  OcclusionMap m(h, w);
  for (double& v : m.tensor().values()) v = rng.uniform() < p ? 1.0 : 0.0;
  return m;
}

TEST(Epe, HandCases) {
  Rng rng(1);
  const FlowField gt = random_flow(rng, 4, 6, 3);
  EXPECT_EQ(metrics::epe(gt, gt), 0.0);
  FlowField off = gt;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) {
      off.u(y, x) += 3;
      off.v(y, x) -= 4;
    }
  EXPECT_NEAR(metrics::epe(off, gt), 5.0, 1e-12);

  FlowField half = gt;
  Tensor valid = Tensor::chw(1, 4, 6);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) {
      if (x < 3) {
        valid(0, y, x) = 1;
        half.u(y, x) += 1;
      } else {
        half.u(y, x) += 100;
      }
    }
  EXPECT_NEAR(metrics::epe(half, gt, &valid), 1.0, 1e-12);
  valid.fill(0.0);
  EXPECT_THROW(metrics::epe(gt, gt, &valid), core::InvalidArgument);
}

TEST(FlAll, HandCases) {
  FlowField gt(1, 1), pred(1, 1);
  gt.u(0, 0) = 100;
  pred.u(0, 0) = 104;
  EXPECT_EQ(metrics::fl_all(pred, gt), 0.0);
  gt.u(0, 0) = 10;
  pred.u(0, 0) = 14;
  EXPECT_EQ(metrics::fl_all(pred, gt), 1.0);
  EXPECT_EQ(metrics::fl_all(gt, gt), 0.0);
}

TEST(OccF1, HandCases) {
  OcclusionMap gt(2, 2), pred(2, 2);
  gt.at(0, 0) = gt.at(0, 1) = 1;
  pred.at(0, 0) = pred.at(1, 1) = 1;
  const auto s = metrics::occ_f1(pred, gt);
  EXPECT_EQ(s.tp, 1);
  EXPECT_EQ(s.fp, 1);
  EXPECT_EQ(s.fn, 1);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 0.5);
  EXPECT_EQ(metrics::occ_f1(gt, gt).f1, 1.0);
  EXPECT_EQ(metrics::occ_f1(OcclusionMap(2, 2), gt).f1, 0.0);
  EXPECT_EQ(metrics::occ_f1(gt, OcclusionMap(2, 2)).f1, 0.0);
  EXPECT_EQ(metrics::occ_f1(OcclusionMap(2, 2), OcclusionMap(2, 2)).f1, 1.0);
  OcclusionMap soft(2, 2);
  soft.at(0, 0) = 0.5;
  soft.at(0, 1) = 0.49;
  EXPECT_EQ(metrics::occ_f1(soft, gt).tp, 1);
  EXPECT_EQ(metrics::occ_f1(soft, gt, 0.4).tp, 2);
}

TEST(Metrics, MatchBruteForceOnRandomInputs) {
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const int h = rng.uniform_int(1, 8), w = rng.uniform_int(1, 8);
    const FlowField gt = random_flow(rng, h, w, 20), pred = random_flow(rng, h, w, 20);
    Tensor valid = Tensor::chw(1, h, w);
    for (double& v : valid.values()) v = rng.uniform() < 0.7;
    valid[0] = 1;
    const Tensor* mask = trial % 2 ? &valid : nullptr;
    const double e = testing::epe_oracle(pred, gt, mask);
    EXPECT_NEAR(metrics::epe(pred, gt, mask), e, 1e-12 * e);
    EXPECT_EQ(metrics::fl_all(pred, gt, mask), testing::fl_all_oracle(pred, gt, mask));

    OcclusionMap p(h, w);
    for (double& v : p.tensor().values()) v = rng.uniform();
    const OcclusionMap g = random_occ(rng, h, w, rng.uniform(0, 0.5));
    const double thr = trial % 3 ? 0.5 : rng.uniform();
    const auto lib = metrics::occ_f1(p, g, thr);
    const auto ref = testing::confusion_oracle(p, g, thr);
    EXPECT_EQ(lib.tp, ref.tp);
    EXPECT_EQ(lib.fp, ref.fp);
    EXPECT_EQ(lib.fn, ref.fn);
    EXPECT_NEAR(lib.f1, testing::f1_oracle(ref), 1e-15);
  }
}

TEST(Oracle, IdentityAndEmptyMaps) {
  Rng rng(3);
  const OcclusionMap m = random_occ(rng, 16, 16, 0.2);
  EXPECT_EQ(metrics::occ_resolution_oracle(m, 1).score.f1, 1.0);
  EXPECT_EQ(metrics::occ_resolution_oracle(m, 1).reconstructed, m);
  EXPECT_EQ(metrics::occ_resolution_oracle(OcclusionMap(16, 16), 4).score.f1, 1.0);
}

TEST(Oracle, CoarseBlockSurvivesThinLineDoesNot) {
  OcclusionMap block(64, 64);
  for (int y = 20; y < 36; ++y)
    for (int x = 8; x < 24; ++x) block.at(y, x) = 1;
  EXPECT_GT(metrics::occ_resolution_oracle(block, 4).score.f1, 0.9);
  // Off-grid placement only rounds the corners.
  OcclusionMap shifted(64, 64);
  for (int y = 21; y < 37; ++y)
    for (int x = 10; x < 26; ++x) shifted.at(y, x) = 1;
  EXPECT_GT(metrics::occ_resolution_oracle(shifted, 4).score.f1, 0.8);

  OcclusionMap line(64, 64);
  for (int y = 0; y < 64; ++y) line.at(y, 30) = 1;
  EXPECT_LT(metrics::occ_resolution_oracle(line, 4).score.f1, 0.5);

  OcclusionMap dot(32, 32);
  dot.at(13, 17) = 1;
  EXPECT_LT(metrics::occ_resolution_oracle(dot, 4).score.f1, 1.0);
}

TEST(Oracle, QuarterIsWorseThanHalfOnThinStructures) {
  OcclusionMap m(48, 64);
  for (int y = 0; y < 48; ++y) {
    m.at(y, 10) = m.at(y, 11) = 1;  // two-pixel strip
    m.at(y, 40) = 1;
  }
  for (int y = 30; y < 44; ++y)
    for (int x = 45; x < 60; ++x) m.at(y, x) = 1;
  const double half = metrics::occ_resolution_oracle(m, 2).score.f1;
  const double quarter = metrics::occ_resolution_oracle(m, 4).score.f1;
  EXPECT_LT(quarter, half);
  EXPECT_LT(half, 1.0);
}

TEST(Report, PoolsCountsAndRejectsEmpty) {
  std::vector<metrics::SampleRow> rows(2);
  rows[0] = {"a", 1.0, 0.0, metrics::f1_from_counts(1, 1, 0, false, false)};
  rows[1] = {"b", 3.0, 0.5, metrics::f1_from_counts(3, 0, 3, false, false)};
  const auto r = metrics::summarize(rows);
  EXPECT_EQ(r.count, 2u);
  EXPECT_DOUBLE_EQ(r.mean_epe, 2.0);
  EXPECT_DOUBLE_EQ(r.fl_all, 0.25);
  ASSERT_TRUE(r.occ && r.mean_f1);
  EXPECT_EQ(r.occ->tp, 4);
  EXPECT_EQ(r.occ->fp, 1);
  EXPECT_EQ(r.occ->fn, 3);
  EXPECT_DOUBLE_EQ(r.occ->f1, 2 * 0.8 * 4 / 7.0 / (0.8 + 4 / 7.0));
  EXPECT_DOUBLE_EQ(*r.mean_f1, (rows[0].occ->f1 + rows[1].occ->f1) / 2);

  std::swap(rows[0], rows[1]);
  EXPECT_DOUBLE_EQ(metrics::summarize(rows).mean_epe, 2.0);
  const auto j = metrics::to_json(r);
  EXPECT_EQ(j.at("count"), 2);
  const std::string csv = metrics::to_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_THROW(metrics::summarize({}), core::InvalidArgument);
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  metrics::CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1.0);
}

}  // namespace
}  // namespace irr
