#include "irr/harness/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace irr::harness {

using core::InvalidArgument;

namespace {

nlohmann::json optimizer_json(const OptimizerConfig& o) {
  return {{"learning_rate", o.learning_rate}, {"total_steps", o.total_steps},
          {"decay_every", o.decay_every},     {"decay_factor", o.decay_factor},
          {"beta1", o.beta1},                 {"beta2", o.beta2},
          {"epsilon", o.epsilon},             {"grad_clip", o.grad_clip}};
}

template <typename T>
void opt(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

}  // namespace

void to_json(nlohmann::json& j, const RunConfig& c) {
  nlohmann::json audit = nlohmann::json::array();
  for (const AuditEntry& e : c.audit) audit.push_back({{"label", e.label}, {"model", e.model}});
  j = nlohmann::json{
      {"model", c.model},
      {"optimizer", optimizer_json(c.optimizer)},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"deterministic", c.deterministic},
      {"threads", c.threads},
      {"dataset", c.dataset.string()},
      {"out", c.out.string()},
      {"checkpoint", c.checkpoint.string()},
      {"eval_split", c.eval_split},
      {"checkpoint_every", c.checkpoint_every},
      {"eval_every", c.eval_every},
      {"supervision", c.supervision == Supervision::Both ? "both" : "forward-only"},
      {"alpha", c.alpha},
      {"augment", c.augment},
      {"data", c.data},
      {"occ_threshold", c.occ_threshold},
      {"visualize", c.visualize},
      {"audit", audit},
      {"audit_baseline", c.audit_baseline},
      {"compare_iterations", c.compare_iterations},
      {"compare_seeds", c.compare_seeds},
      {"oracle_factors", c.oracle_factors},
  };
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  c = RunConfig{};
  nlohmann::json defaults;
  to_json(defaults, c);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw InvalidArgument("unknown config key '" + key + "'");
  }
  opt(j, "model", c.model);
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    opt(o, "learning_rate", c.optimizer.learning_rate);
    opt(o, "total_steps", c.optimizer.total_steps);
    opt(o, "decay_every", c.optimizer.decay_every);
    opt(o, "decay_factor", c.optimizer.decay_factor);
    opt(o, "beta1", c.optimizer.beta1);
    opt(o, "beta2", c.optimizer.beta2);
    opt(o, "epsilon", c.optimizer.epsilon);
    opt(o, "grad_clip", c.optimizer.grad_clip);
  }
  opt(j, "batch_size", c.batch_size);
  opt(j, "seed", c.seed);
  opt(j, "deterministic", c.deterministic);
  opt(j, "threads", c.threads);
  if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  if (j.contains("checkpoint")) c.checkpoint = j.at("checkpoint").get<std::string>();
  opt(j, "eval_split", c.eval_split);
  opt(j, "checkpoint_every", c.checkpoint_every);
  opt(j, "eval_every", c.eval_every);
  if (j.contains("supervision")) {
    const auto s = j.at("supervision").get<std::string>();
    if (s == "both") c.supervision = Supervision::Both;
    else if (s == "forward-only") c.supervision = Supervision::ForwardOnly;
    else throw InvalidArgument("supervision must be 'both' or 'forward-only'");
  }
  opt(j, "alpha", c.alpha);
  opt(j, "augment", c.augment);
  opt(j, "data", c.data);
  opt(j, "occ_threshold", c.occ_threshold);
  opt(j, "visualize", c.visualize);
  if (j.contains("audit")) {
    for (const auto& e : j.at("audit")) {
      c.audit.push_back({e.at("label").get<std::string>(), e.at("model").get<models::ModelConfig>()});
    }
  }
  opt(j, "audit_baseline", c.audit_baseline);
  opt(j, "compare_iterations", c.compare_iterations);
  opt(j, "compare_seeds", c.compare_seeds);
  opt(j, "oracle_factors", c.oracle_factors);
  if (c.batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (c.optimizer.total_steps < 0) throw InvalidArgument("total_steps must be >= 0");
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open config " + path.string());
  try {
    return nlohmann::json::parse(is).get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("invalid config " + path.string() + ": " + e.what());
  }
}

void save_run_config(const RunConfig& c, const std::filesystem::path& path) {
  std::ofstream os(path);
  os << nlohmann::json(c).dump(2) << "\n";
  if (!os) throw InvalidArgument("cannot write " + path.string());
}

}  // namespace irr::harness
