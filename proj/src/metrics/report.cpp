#include "irr/metrics/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace irr::metrics {

EvalReport summarize(std::vector<SampleRow> rows) {
  if (rows.empty()) throw core::InvalidArgument("evaluation report needs at least one sample");
  EvalReport r;
  CompensatedSum epe_sum, fl_sum, f1_sum;
  std::int64_t tp = 0, fp = 0, fn = 0, with_occ = 0;
  bool pred_any = false, gt_any = false;
  for (const SampleRow& row : rows) {
    epe_sum.add(row.epe);
    fl_sum.add(row.fl_all);
    if (row.occ) {
      ++with_occ;
      tp += row.occ->tp;
      fp += row.occ->fp;
      fn += row.occ->fn;
      pred_any |= row.occ->tp + row.occ->fp > 0;
      gt_any |= row.occ->tp + row.occ->fn > 0;
      f1_sum.add(row.occ->f1);
    }
  }
  const double n = static_cast<double>(rows.size());
  r.mean_epe = epe_sum.value() / n;
  r.fl_all = fl_sum.value() / n;
  if (with_occ > 0) {
    r.occ = f1_from_counts(tp, fp, fn, !pred_any, !gt_any);
    r.mean_f1 = f1_sum.value() / static_cast<double>(with_occ);
  }
  r.count = rows.size();
  r.rows = std::move(rows);
  return r;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j{{"count", report.count}, {"mean_epe", report.mean_epe}, {"fl_all", report.fl_all}};
  if (report.occ) {
    j["occlusion"] = {{"precision", report.occ->precision},
                      {"recall", report.occ->recall},
                      {"pooled_f1", report.occ->f1},
                      {"mean_f1", *report.mean_f1}};
  }
  return j;
}

std::string to_csv(const EvalReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "id,epe,fl_all,precision,recall,f1\n";
  for (const SampleRow& row : report.rows) {
    os << row.id << ',' << row.epe << ',' << row.fl_all;
    if (row.occ) {
      os << ',' << row.occ->precision << ',' << row.occ->recall << ',' << row.occ->f1;
    } else {
      os << ",,,";
    }
    os << '\n';
  }
  return os.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& json_path,
                  const std::filesystem::path& csv_path) {
  std::ofstream js(json_path);
  js << to_json(report).dump(2) << "\n";
  std::ofstream cs(csv_path);
  cs << to_csv(report);
  if (!js || !cs) throw std::runtime_error("failed to write evaluation report");
}

}  // namespace irr::metrics
