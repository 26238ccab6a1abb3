#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "irr/datagen/dataset_io.hpp"
#include "irr/harness/commands.hpp"
#include "irr/harness/run_config.hpp"
#include "irr/harness/trainer.hpp"
#include "irr/models/checkpoint.hpp"
#include "irr/models/model.hpp"

namespace irr {
namespace {

namespace fs = std::filesystem;
using harness::RunConfig;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("irr_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

datagen::DatasetSpec tiny_data(std::size_t count) {
  datagen::DatasetSpec d;
  d.scene.height = 24;
  d.scene.width = 32;
  d.base_seed = 3;
  d.count = count;
  return d;
}

RunConfig tiny_run(bool occlusion) {
  RunConfig c;
  c.model.variant = models::Variant::FlowNetIrr;
  c.model.encoder_channels = {8, 12};
  c.model.decoder_width = 12;
  c.model.decoder_layers = 3;
  c.model.cost_volume_range = 2;
  c.model.occlusion = occlusion;
  c.model.iterations = 2;
  c.optimizer.total_steps = 20;
  c.optimizer.decay_every = 0;
  c.batch_size = 2;
  c.seed = 5;
  return c;
}

const datagen::Dataset& shared_data() {
  static const datagen::Dataset ds = datagen::generate_dataset(tiny_data(40));
  return ds;
}

std::string trained_checkpoint(const RunConfig& c, const fs::path& path) {
  models::Model m(c.model);
  harness::train(m, shared_data().split("train"), c);
  models::save_checkpoint(m, path);
  return slurp(path);
}

TEST(Generate, SplitSizesFollowTheFraction) {
  for (auto [count, train] : {std::pair<std::size_t, std::size_t>{0, 0}, {10, 9}, {100, 90}}) {
    auto spec = tiny_data(count);
    EXPECT_EQ(datagen::train_count(spec), train);
    if (count <= 10) {
      const auto ds = datagen::generate_dataset(spec);
      EXPECT_EQ(ds.split("train").size(), train);
      EXPECT_EQ(ds.split("val").size(), count - train);
    }
  }
}

TEST(Generate, CommandIsBitwiseReproducible) {
  RunConfig c;
  c.data = tiny_data(6);
  c.out = scratch("gen_a");
  ASSERT_EQ(harness::cmd_generate(c), 0);
  const fs::path a = c.out;
  c.out = scratch("gen_b");
  ASSERT_EQ(harness::cmd_generate(c), 0);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(c.out / fs::relative(e.path(), a))) << e.path();
  }
  EXPECT_GT(files, 6u * 6u);
}

TEST(Train, ZeroStepsLeavesInitialWeights) {
  RunConfig c = tiny_run(true);
  c.optimizer.total_steps = 0;
  const fs::path dir = scratch("zero");
  models::Model fresh(c.model);
  models::save_checkpoint(fresh, dir / "init.bin");
  EXPECT_EQ(trained_checkpoint(c, dir / "trained.bin"), slurp(dir / "init.bin"));
}

TEST(Train, DeterministicModeIsBitwiseReproducible) {
  const RunConfig c = tiny_run(true);
  const fs::path dir = scratch("det");
  const std::string a = trained_checkpoint(c, dir / "a.bin");
  EXPECT_EQ(a, trained_checkpoint(c, dir / "b.bin"));
  RunConfig other = c;
  other.seed = 6;
  EXPECT_NE(a, trained_checkpoint(other, dir / "c.bin"));
}

TEST(Train, WithoutOcclusionNoOcclusionTermOrBlockExists) {
  const RunConfig c = tiny_run(false);
  models::Model m(c.model);
  for (const auto& [name, size] : models::count_parameters(m).by_block)
    EXPECT_EQ(name.find("occ"), std::string::npos) << name;
  const auto result = harness::train(m, shared_data().split("train"), c);
  ASSERT_EQ(result.log.size(), 20u);
  for (const auto& rec : result.log)
    for (const auto& s : rec.samples)
      for (const auto& t : s.terms) {
        EXPECT_FALSE(t.has_occ);
        EXPECT_EQ(t.lambda, 0.0);
      }
}

TEST(Train, LambdaBalancesEveryLoggedTerm) {
  const RunConfig c = tiny_run(true);
  models::Model m(c.model);
  std::size_t checked = 0;
  harness::train(m, shared_data().split("train"), c, [&](const harness::StepRecord& rec) {
    EXPECT_EQ(rec.samples.size(), 2u);
    for (const auto& s : rec.samples) {
      EXPECT_NEAR(s.recompute_total(), s.total, 1e-9 * std::max(1.0, s.total));
      for (const auto& t : s.terms) {
        ASSERT_TRUE(t.has_occ);
        if (t.occ <= 0.0) continue;
        EXPECT_NEAR(t.lambda * t.occ, t.flow, 1e-9);
        ++checked;
      }
    }
  });
  EXPECT_EQ(checked, 20u * 2 * 2);
}

TEST(Train, ErrorDropsAndBeatsZeroFlow) {
  RunConfig c = tiny_run(false);
  c.model.iterations = 1;
  c.optimizer.total_steps = 400;
  models::Model m(c.model);
  const auto train_set = shared_data().split("train");
  const double before = harness::evaluate(m, train_set).mean_epe;
  harness::train(m, train_set, c);
  const double after = harness::evaluate(m, train_set).mean_epe;
  EXPECT_LT(after, 0.95 * before);
  EXPECT_LT(after, harness::evaluate_zero(train_set).mean_epe);
}

TEST(Train, RejectsEmptyTrainingSet) {
  RunConfig c = tiny_run(false);
  models::Model m(c.model);
  EXPECT_ANY_THROW(harness::train(m, {}, c));
}

TEST(Evaluate, OracleAndZeroBaselines) {
  const auto val = shared_data().split("train");
  const auto oracle = harness::evaluate_oracle(val);
  EXPECT_EQ(oracle.mean_epe, 0.0);
  EXPECT_EQ(oracle.fl_all, 0.0);
  ASSERT_TRUE(oracle.occ);
  EXPECT_EQ(oracle.occ->f1, 1.0);
  EXPECT_EQ(*oracle.mean_f1, 1.0);

  const auto zero = harness::evaluate_zero(val);
  double expected = 0.0;
  for (const auto* s : val) {
    double sum = 0.0;
    for (int y = 0; y < s->flow_fw.height(); ++y)
      for (int x = 0; x < s->flow_fw.width(); ++x) sum += std::hypot(s->flow_fw.u(y, x), s->flow_fw.v(y, x));
    expected += sum / (s->flow_fw.height() * s->flow_fw.width());
  }
  EXPECT_NEAR(zero.mean_epe, expected / val.size(), 1e-12);
  ASSERT_TRUE(zero.occ);
  EXPECT_EQ(zero.occ->tp, 0);
  EXPECT_EQ(zero.occ->fp, 0);
  EXPECT_THROW(harness::evaluate_oracle({}), core::InvalidArgument);
}

TEST(Evaluate, HonoursValidMask) {
  datagen::SceneSample s = shared_data().samples[0];
  const double full = harness::evaluate_zero({&s}).mean_epe;
  core::Tensor valid = core::Tensor::chw(1, s.flow_fw.height(), s.flow_fw.width());
  valid(0, 3, 4) = 1;
  s.valid = valid;
  EXPECT_NEAR(harness::evaluate_zero({&s}).mean_epe, std::hypot(s.flow_fw.u(3, 4), s.flow_fw.v(3, 4)),
              1e-12);
  EXPECT_NE(harness::evaluate_zero({&s}).mean_epe, full);
}

TEST(Evaluate, ModelOutputIsScoredAtInputResolution) {
  const RunConfig c = tiny_run(true);
  models::Model m(c.model);
  const auto r = harness::evaluate(m, shared_data().split("val"));
  EXPECT_EQ(r.count, 4u);
  EXPECT_TRUE(std::isfinite(r.mean_epe));
  EXPECT_TRUE(r.occ.has_value());
}

TEST(Audit, RelativeChangeAndUnknownBaseline) {
  std::vector<harness::AuditEntry> entries(2);
  entries[0].label = "one";
  entries[0].model = tiny_run(false).model;
  entries[1].label = "occ";
  entries[1].model = tiny_run(true).model;
  const auto rows = harness::audit_params(entries, "one");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].relative_change, 0.0);
  EXPECT_GT(rows[1].parameters, rows[0].parameters);
  EXPECT_NEAR(rows[1].relative_change,
              100.0 * (double(rows[1].parameters) - double(rows[0].parameters)) / double(rows[0].parameters),
              1e-12);
  EXPECT_EQ(rows[0].parameters, models::count_parameters(models::Model(entries[0].model)).total);
  EXPECT_NE(harness::audit_csv(rows).find("occ"), std::string::npos);
  EXPECT_ANY_THROW(harness::audit_params(entries, "missing"));
}

TEST(Comparison, SharedRowsKeepOneParameterCount) {
  RunConfig c = tiny_run(false);
  c.optimizer.total_steps = 2;
  c.compare_iterations = {1, 2};
  c.compare_seeds = {1};
  const auto rows = harness::irr_vs_stacking(c, shared_data());
  ASSERT_EQ(rows.size(), 3u);
  std::size_t shared = 0, stacked = 0;
  for (const auto& r : rows) {
    EXPECT_EQ(r.epe.size(), 1u);
    if (r.mode == "shared") {
      if (shared) {
        EXPECT_EQ(r.parameters, shared);
      }
      shared = r.parameters;
    } else {
      stacked = r.parameters;
    }
  }
  EXPECT_GT(stacked, shared);
  EXPECT_NE(harness::comparison_csv(rows).find("shared"), std::string::npos);
}

TEST(Oracle, ThinFractionAndStudyOrdering) {
  core::OcclusionMap dot(12, 12), blob(12, 12), empty(12, 12);
  dot.at(5, 5) = 1;
  for (int y = 2; y < 10; ++y)
    for (int x = 2; x < 10; ++x) blob.at(y, x) = 1;
  EXPECT_EQ(harness::thin_fraction(dot), 1.0);
  EXPECT_EQ(harness::thin_fraction(empty), 0.0);
  EXPECT_LT(harness::thin_fraction(blob), 0.5);

  std::vector<const core::OcclusionMap*> maps;
  for (const auto& s : shared_data().samples) maps.push_back(&s.occ1);
  const auto rows = harness::oracle_study(maps, {1, 2, 4});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].mean_f1, 1.0);
  EXPECT_LT(rows[2].mean_f1, rows[1].mean_f1);
  EXPECT_LT(rows[1].mean_f1, 1.0);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  RunConfig c = tiny_run(true);
  c.compare_seeds = {4, 9};
  c.alpha = {0.5, 1.0};
  c.augment.crop_height = 16;
  nlohmann::json j = c;
  RunConfig back = j.get<RunConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  j["learning_rate"] = 1.0;
  EXPECT_ANY_THROW(j.get<RunConfig>());
  EXPECT_EQ(harness::alpha_length(c.model), 1u);
}

}  // namespace
}  // namespace irr
