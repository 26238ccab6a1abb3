// Command-line front end: generate, train, eval, audit-params,
// irr-vs-stacking, oracle-study.
#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>

#include "irr/harness/commands.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool deterministic = false;
  std::string dataset;
  std::string checkpoint;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "RunConfig JSON file");
  sub->add_option("--seed", f.seed, "Seed for data, initialisation and batching");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_flag("--deterministic", f.deterministic, "Single-threaded, fixed reduction order");
}

irr::harness::RunConfig resolve(const CommonFlags& f) {
  irr::harness::RunConfig c;
  if (!f.config.empty()) c = irr::harness::load_run_config(f.config);
  if (f.seed) {
    c.seed = *f.seed;
    c.data.base_seed = *f.seed;
  }
  if (!f.out.empty()) c.out = f.out;
  if (f.deterministic) c.deterministic = true;
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (!f.checkpoint.empty()) c.checkpoint = f.checkpoint;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative residual refinement for joint flow and occlusion estimation"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::optional<std::size_t> count;

  auto* gen = app.add_subcommand("generate", "Render a synthetic dataset");
  add_common(gen, flags);
  gen->add_option("--count", count, "Number of samples (overrides the config)");
  auto* train = app.add_subcommand("train", "Train a model on a generated dataset");
  add_common(train, flags);
  train->add_option("--dataset", flags.dataset, "Dataset directory");
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint (or the GT itself) on a dataset");
  add_common(eval, flags);
  eval->add_option("--dataset", flags.dataset, "Dataset directory");
  eval->add_option("--checkpoint", flags.checkpoint, "Checkpoint file; omit to score GT against itself");
  auto* audit = app.add_subcommand("audit-params", "Parameter counts of a grid of model configs");
  add_common(audit, flags);
  auto* cmp = app.add_subcommand("irr-vs-stacking", "Shared vs per-stage decoders over N");
  add_common(cmp, flags);
  cmp->add_option("--dataset", flags.dataset, "Dataset directory");
  auto* oracle = app.add_subcommand("oracle-study", "Occlusion resolution round-trip study");
  add_common(oracle, flags);
  oracle->add_option("--dataset", flags.dataset, "Dataset directory");

  CLI11_PARSE(app, argc, argv);

  try {
    irr::harness::RunConfig c = resolve(flags);
    if (count) c.data.count = *count;
    if (gen->parsed()) return irr::harness::cmd_generate(c);
    if (train->parsed()) return irr::harness::cmd_train(c);
    if (eval->parsed()) return irr::harness::cmd_eval(c);
    if (audit->parsed()) return irr::harness::cmd_audit_params(c);
    if (cmp->parsed()) return irr::harness::cmd_irr_vs_stacking(c);
    if (oracle->parsed()) return irr::harness::cmd_oracle_study(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
