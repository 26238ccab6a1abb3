#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "irr/datagen/dataset_io.hpp"
#include "irr/harness/run_config.hpp"
#include "irr/metrics/metrics.hpp"

namespace irr::harness {

// Each command writes its outputs below config.out and returns a process exit code.

int cmd_generate(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_eval(const RunConfig& config);
int cmd_audit_params(const RunConfig& config);
int cmd_irr_vs_stacking(const RunConfig& config);
int cmd_oracle_study(const RunConfig& config);

struct AuditRow {
  std::string label;
  std::size_t parameters = 0;
  /// (parameters - baseline) / baseline, in percent.
  double relative_change = 0.0;
  std::map<std::string, std::size_t> blocks;
  std::optional<double> epe;
  std::optional<double> f1;
};

/// Counts every configuration; throws if `baseline` names no entry.
std::vector<AuditRow> audit_params(const std::vector<AuditEntry>& entries,
                                   const std::string& baseline);
std::string audit_csv(const std::vector<AuditRow>& rows);
nlohmann::json audit_json(const std::vector<AuditRow>& rows, const std::string& baseline);

struct ComparisonRow {
  int iterations = 0;
  std::string mode;
  std::size_t parameters = 0;
  std::vector<double> epe;
  std::vector<double> f1;
  double mean_epe = 0.0;
  double sd_epe = 0.0;
};

/// Trains `config.model` for every N in compare_iterations, in shared and
/// per-stage mode, once per seed in compare_seeds, and scores the val split.
/// Per-stage runs are skipped for N = 1, where both modes coincide.
std::vector<ComparisonRow> irr_vs_stacking(const RunConfig& config, const datagen::Dataset& data);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

struct OracleRow {
  int factor = 1;
  double mean_f1 = 0.0;
  double pooled_f1 = 0.0;
  /// Mean F1 per thinness bucket label; see thin_fraction.
  std::map<std::string, double> by_thinness;
  std::map<std::string, std::size_t> bucket_sizes;
};

/// Share of occluded pixels that a 3x3 erosion removes (1 for maps made of
/// one-pixel structures, near 0 for large blobs); 0 for all-visible maps.
double thin_fraction(const core::OcclusionMap& occ);

std::vector<OracleRow> oracle_study(const std::vector<const core::OcclusionMap*>& maps,
                                    const std::vector<int>& factors);
nlohmann::json oracle_json(const std::vector<OracleRow>& rows);

}  // namespace irr::harness
