#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "irr/datagen/augment.hpp"
#include "irr/datagen/dataset_io.hpp"
#include "irr/models/config.hpp"

namespace irr::harness {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  int total_steps = 2000;
  /// Learning rate is multiplied by decay_factor every decay_every steps (0 = never).
  int decay_every = 800;
  double decay_factor = 0.5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clip; 0 disables.
  double grad_clip = 100.0;
};

/// Supervision available to training.
enum class Supervision { Both, ForwardOnly };

struct AuditEntry {
  std::string label;
  models::ModelConfig model;
};

/// Settings of every command; each command reads the sections it needs.
struct RunConfig {
  models::ModelConfig model;
  OptimizerConfig optimizer;
  int batch_size = 4;
  std::uint64_t seed = 1;
  bool deterministic = true;
  unsigned threads = 1;

  std::filesystem::path dataset;
  std::filesystem::path out = "out";
  std::filesystem::path checkpoint;
  std::string eval_split = "val";

  /// Training: log every step, checkpoint every n steps (0 = final only),
  /// evaluate on the val split every n steps (0 = never).
  int checkpoint_every = 0;
  int eval_every = 0;
  Supervision supervision = Supervision::Both;
  /// Per-scale (flownet) or per-level (pwc) loss weights; empty = all 1.
  std::vector<double> alpha;
  datagen::AugmentConfig augment;

  /// generate
  datagen::DatasetSpec data;

  /// eval
  double occ_threshold = 0.5;
  int visualize = 0;

  /// audit-params
  std::vector<AuditEntry> audit;
  std::string audit_baseline;

  /// irr-vs-stacking
  std::vector<int> compare_iterations = {1, 2, 3};
  std::vector<std::uint64_t> compare_seeds = {1, 2, 3};

  /// oracle-study
  std::vector<int> oracle_factors = {1, 2, 4};
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Missing keys keep their defaults; unknown top-level keys are rejected.
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& c, const std::filesystem::path& path);

}  // namespace irr::harness
