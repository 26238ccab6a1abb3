#include "irr/harness/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "irr/harness/trainer.hpp"
#include "irr/harness/visualize.hpp"
#include "irr/models/checkpoint.hpp"

namespace irr::harness {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
  if (!os) throw datagen::IoError("cannot write " + path.string());
}

datagen::Dataset load_dataset(const RunConfig& c) {
  if (c.dataset.empty()) throw core::InvalidArgument("no dataset path configured");
  return datagen::read_dataset(c.dataset);
}

models::ModelConfig seeded(models::ModelConfig m, std::uint64_t seed) {
  m.init_seed = seed;
  return m;
}

std::string bucket_of(double thin) {
  if (thin < 0.25) return "0.00-0.25";
  if (thin < 0.5) return "0.25-0.50";
  if (thin < 0.75) return "0.50-0.75";
  return "0.75-1.00";
}

}  // namespace

int cmd_generate(const RunConfig& c) {
  const datagen::Dataset ds = datagen::generate_dataset(c.data, c.deterministic ? 1 : c.threads);
  datagen::write_dataset(ds, c.out);
  std::cout << "wrote " << ds.samples.size() << " samples (" << datagen::train_count(c.data)
            << " train) to " << c.out.string() << "\n";
  return 0;
}

int cmd_train(const RunConfig& c) {
  const datagen::Dataset ds = load_dataset(c);
  const auto train_set = ds.split("train");
  fs::create_directories(c.out);
  save_run_config(c, c.out / "run_config.json");

  models::Model model(seeded(c.model, c.seed));
  std::ofstream log(c.out / "train_log.jsonl");
  const auto val = ds.split("val");
  auto on_step = [&](const StepRecord& r) {
    log << step_json(r).dump() << "\n";
    if (c.checkpoint_every > 0 && r.step % c.checkpoint_every == 0) {
      models::save_checkpoint(model, c.out / ("checkpoint_step" + std::to_string(r.step) + ".bin"));
    }
    if (c.eval_every > 0 && r.step % c.eval_every == 0 && !val.empty()) {
      const auto rep = evaluate(model, val, c.occ_threshold, c.deterministic ? 1 : c.threads);
      std::cout << "step " << r.step << " loss " << r.loss << " val_epe " << rep.mean_epe << "\n";
    }
  };
  train(model, train_set, c, on_step);
  models::save_checkpoint(model, c.out / "checkpoint.bin");
  std::cout << "saved " << (c.out / "checkpoint.bin").string() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& c) {
  const datagen::Dataset ds = load_dataset(c);
  auto samples = ds.split(c.eval_split);
  if (samples.empty()) {
    throw core::InvalidArgument("split '" + c.eval_split + "' of " + c.dataset.string() + " is empty");
  }
  fs::create_directories(c.out);
  metrics::EvalReport rep;
  std::optional<models::Model> model;
  if (c.checkpoint.empty()) {
    // No checkpoint: score the ground truth against itself.
    rep = evaluate_oracle(samples);
  } else {
    model.emplace(models::load_checkpoint(c.checkpoint));
    rep = evaluate(*model, samples, c.occ_threshold, c.deterministic ? 1 : c.threads);
  }
  metrics::write_report(rep, c.out / "eval_report.json", c.out / "eval_samples.csv");
  if (model && c.visualize > 0) {
    fs::create_directories(c.out / "visuals");
    for (int i = 0; i < c.visualize && i < static_cast<int>(samples.size()); ++i) {
      const auto& s = *samples[i];
      models::ParamBinding binding(false);
      const auto fwd = models::forward(*model, core::constant(s.image1.tensor()),
                                       core::constant(s.image2.tensor()), binding);
      const double scale_ref = std::max(1.0, [&] {
        double m = 0.0;
        for (int y = 0; y < s.flow_fw.height(); ++y)
          for (int x = 0; x < s.flow_fw.width(); ++x)
            m = std::max(m, std::hypot(s.flow_fw.u(y, x), s.flow_fw.v(y, x)));
        return m;
      }());
      const fs::path base = c.out / "visuals" / s.id;
      write_flow_png(base.string() + "_flow_pred.png", core::FlowField(fwd.output.flow_fw.value()), scale_ref);
      write_flow_png(base.string() + "_flow_gt.png", s.flow_fw, scale_ref);
      if (fwd.output.occ1_logits.defined()) {
        write_occlusion_png(base.string() + "_occ_pred.png", core::OcclusionMap(fwd.output.occ1().value()));
      }
      write_occlusion_png(base.string() + "_occ_gt.png", s.occ1);
    }
  }
  std::cout << metrics::to_json(rep).dump(2) << "\n";
  return 0;
}

std::vector<AuditRow> audit_params(const std::vector<AuditEntry>& entries,
                                   const std::string& baseline) {
  std::vector<AuditRow> rows;
  std::optional<std::size_t> base;
  for (const AuditEntry& e : entries) {
    models::Model m(e.model);
    const auto pc = models::count_parameters(m);
    rows.push_back({e.label, pc.total, 0.0, pc.by_block, std::nullopt, std::nullopt});
    if (e.label == baseline) base = pc.total;
  }
  if (!base) throw core::InvalidArgument("unknown baseline label '" + baseline + "'");
  for (AuditRow& r : rows) {
    r.relative_change = 100.0 * (static_cast<double>(r.parameters) - static_cast<double>(*base)) /
                        static_cast<double>(*base);
  }
  return rows;
}

std::string audit_csv(const std::vector<AuditRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "label,parameters,relative_change_percent,epe,f1\n";
  for (const AuditRow& r : rows) {
    os << r.label << ',' << r.parameters << ',' << r.relative_change << ',';
    if (r.epe) os << *r.epe;
    os << ',';
    if (r.f1) os << *r.f1;
    os << '\n';
  }
  return os.str();
}

nlohmann::json audit_json(const std::vector<AuditRow>& rows, const std::string& baseline) {
  nlohmann::json out{{"baseline", baseline}, {"rows", nlohmann::json::array()}};
  for (const AuditRow& r : rows) {
    nlohmann::json j{{"label", r.label},
                     {"parameters", r.parameters},
                     {"relative_change_percent", r.relative_change},
                     {"blocks", r.blocks}};
    if (r.epe) j["epe"] = *r.epe;
    if (r.f1) j["f1"] = *r.f1;
    out["rows"].push_back(j);
  }
  return out;
}

int cmd_audit_params(const RunConfig& c) {
  if (c.audit.empty()) throw core::InvalidArgument("audit-params needs a non-empty 'audit' list");
  const auto rows = audit_params(c.audit, c.audit_baseline);
  fs::create_directories(c.out);
  write_text(c.out / "audit.csv", audit_csv(rows));
  write_text(c.out / "audit.json", audit_json(rows, c.audit_baseline).dump(2) + "\n");
  std::cout << audit_csv(rows);
  return 0;
}

std::vector<ComparisonRow> irr_vs_stacking(const RunConfig& c, const datagen::Dataset& data) {
  const auto train_set = data.split("train");
  const auto val = data.split("val");
  if (val.empty()) throw core::InvalidArgument("irr-vs-stacking needs a non-empty val split");
  std::vector<ComparisonRow> rows;
  for (int n : c.compare_iterations) {
    for (auto mode : {models::SharingMode::Shared, models::SharingMode::PerStage}) {
      if (n == 1 && mode == models::SharingMode::PerStage) continue;
      ComparisonRow row;
      row.iterations = n;
      row.mode = models::to_string(mode);
      for (std::uint64_t seed : c.compare_seeds) {
        RunConfig rc = c;
        rc.seed = seed;
        rc.model.iterations = n;
        rc.model.sharing = mode;
        models::Model model(seeded(rc.model, seed));
        row.parameters = models::count_parameters(model).total;
        train(model, train_set, rc);
        const auto rep = evaluate(model, val, c.occ_threshold, c.deterministic ? 1 : c.threads);
        row.epe.push_back(rep.mean_epe);
        if (rep.mean_f1) row.f1.push_back(*rep.mean_f1);
      }
      double mean = 0.0;
      for (double e : row.epe) mean += e;
      mean /= static_cast<double>(row.epe.size());
      double var = 0.0;
      for (double e : row.epe) var += (e - mean) * (e - mean);
      row.mean_epe = mean;
      row.sd_epe = row.epe.size() > 1 ? std::sqrt(var / static_cast<double>(row.epe.size() - 1)) : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os.precision(8);
  os << "iterations,mode,parameters,mean_epe,sd_epe,runs\n";
  for (const ComparisonRow& r : rows) {
    os << r.iterations << ',' << r.mode << ',' << r.parameters << ',' << r.mean_epe << ','
       << r.sd_epe << ',' << r.epe.size() << '\n';
  }
  return os.str();
}

int cmd_irr_vs_stacking(const RunConfig& c) {
  const datagen::Dataset ds = load_dataset(c);
  const auto rows = irr_vs_stacking(c, ds);
  fs::create_directories(c.out);
  write_text(c.out / "irr_vs_stacking.csv", comparison_csv(rows));
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"iterations", r.iterations},
                 {"mode", r.mode},
                 {"parameters", r.parameters},
                 {"epe", r.epe},
                 {"f1", r.f1},
                 {"mean_epe", r.mean_epe},
                 {"sd_epe", r.sd_epe}});
  }
  write_text(c.out / "irr_vs_stacking.json", j.dump(2) + "\n");
  std::cout << comparison_csv(rows);
  return 0;
}

double thin_fraction(const core::OcclusionMap& occ) {
  const int h = occ.height(), w = occ.width();
  std::size_t occluded = 0, removed = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (occ.at(y, x) < 0.5) continue;
      ++occluded;
      bool interior = true;
      for (int dy = -1; dy <= 1 && interior; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          if (occ.at(yy, xx) < 0.5) {
            interior = false;
            break;
          }
        }
      if (!interior) ++removed;
    }
  return occluded == 0 ? 0.0 : static_cast<double>(removed) / static_cast<double>(occluded);
}

std::vector<OracleRow> oracle_study(const std::vector<const core::OcclusionMap*>& maps,
                                    const std::vector<int>& factors) {
  std::vector<OracleRow> rows;
  for (int f : factors) {
    OracleRow row;
    row.factor = f;
    metrics::CompensatedSum total;
    std::map<std::string, metrics::CompensatedSum> sums;
    std::int64_t tp = 0, fp = 0, fn = 0;
    bool pred_any = false, gt_any = false;
    for (const auto* m : maps) {
      const auto r = metrics::occ_resolution_oracle(*m, f);
      total.add(r.score.f1);
      const std::string b = bucket_of(thin_fraction(*m));
      sums[b].add(r.score.f1);
      ++row.bucket_sizes[b];
      tp += r.score.tp;
      fp += r.score.fp;
      fn += r.score.fn;
      pred_any |= r.score.tp + r.score.fp > 0;
      gt_any |= r.score.tp + r.score.fn > 0;
    }
    row.mean_f1 = maps.empty() ? 1.0 : total.value() / static_cast<double>(maps.size());
    row.pooled_f1 = metrics::f1_from_counts(tp, fp, fn, !pred_any, !gt_any).f1;
    for (auto& [b, s] : sums) row.by_thinness[b] = s.value() / static_cast<double>(row.bucket_sizes[b]);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json oracle_json(const std::vector<OracleRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const OracleRow& r : rows) {
    j.push_back({{"factor", r.factor},
                 {"mean_f1", r.mean_f1},
                 {"pooled_f1", r.pooled_f1},
                 {"by_thinness", r.by_thinness},
                 {"bucket_sizes", r.bucket_sizes}});
  }
  return j;
}

int cmd_oracle_study(const RunConfig& c) {
  const datagen::Dataset ds = load_dataset(c);
  std::vector<const core::OcclusionMap*> maps;
  for (const auto& s : ds.samples) maps.push_back(&s.occ1);
  const auto rows = oracle_study(maps, c.oracle_factors);
  fs::create_directories(c.out);
  write_text(c.out / "oracle_study.json", oracle_json(rows).dump(2) + "\n");
  std::cout << oracle_json(rows).dump(2) << "\n";
  return 0;
}

}  // namespace irr::harness
