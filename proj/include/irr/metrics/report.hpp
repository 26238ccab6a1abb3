#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "irr/metrics/metrics.hpp"

namespace irr::metrics {

struct SampleRow {
  std::string id;
  double epe = 0.0;
  double fl_all = 0.0;
  std::optional<F1Score> occ;
};

struct EvalReport {
  double mean_epe = 0.0;
  double fl_all = 0.0;
  /// Occlusion scores from confusion counts pooled over all samples, plus the
  /// per-sample F1 average.
  std::optional<F1Score> occ;
  std::optional<double> mean_f1;
  std::size_t count = 0;
  std::vector<SampleRow> rows;
};

/// Builds a report from per-sample rows; order of rows does not change the result
/// beyond compensated-summation rounding.
EvalReport summarize(std::vector<SampleRow> rows);

nlohmann::json to_json(const EvalReport& report);
std::string to_csv(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& json_path,
                  const std::filesystem::path& csv_path);

}  // namespace irr::metrics
