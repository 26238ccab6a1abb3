#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "irr/datagen/render.hpp"
#include "irr/harness/run_config.hpp"
#include "irr/losses/losses.hpp"
#include "irr/metrics/report.hpp"
#include "irr/models/model.hpp"

namespace irr::harness {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-sample objective built from every step of a forward pass.
///
/// flownet-irr: one scale per step, predictions resized to input resolution.
/// pwc-irr: one term per level at its native resolution against resized GT,
/// with flows multiplied back to input-pixel units; occlusion-upsampler stages
/// add further terms. `alpha` empty means all ones.
losses::Objective sample_objective(const models::Model& model, const models::ForwardResult& fwd,
                                   const datagen::SceneSample& sample, Supervision supervision,
                                   const std::vector<double>& alpha);

/// Number of loss terms per iteration (flownet-irr) or in total (pwc-irr).
std::size_t alpha_length(const models::ModelConfig& config);

struct StepRecord {
  int step = 0;
  double learning_rate = 0.0;
  /// Mean of the per-sample totals.
  double loss = 0.0;
  /// Breakdown of every sample in the batch, in batch order.
  std::vector<losses::LossBreakdown> samples;
};

struct TrainResult {
  std::vector<StepRecord> log;
};

/// Adam with step decay over random minibatches of `train`.
///
/// In deterministic mode samples are processed and reduced in batch order; in
/// the other mode the batch is spread over `threads` workers and gradients
/// are summed in completion order. `on_step` sees every record as it is made.
TrainResult train(models::Model& model, const std::vector<const datagen::SceneSample*>& train,
                  const RunConfig& config,
                  const std::function<void(const StepRecord&)>& on_step = {});

/// Per-sample EPE / Fl-all of the forward flow and, with an occlusion head,
/// occlusion F1 of frame 1, all at input resolution.
metrics::EvalReport evaluate(const models::Model& model,
                             const std::vector<const datagen::SceneSample*>& samples,
                             double occ_threshold = 0.5, unsigned threads = 1);

/// Scores the ground truth against itself (sanity path of the evaluator).
metrics::EvalReport evaluate_oracle(const std::vector<const datagen::SceneSample*>& samples);

/// Zero-flow and all-visible predictions, the trivial baselines.
metrics::EvalReport evaluate_zero(const std::vector<const datagen::SceneSample*>& samples);

nlohmann::json step_json(const StepRecord& r);

}  // namespace irr::harness
