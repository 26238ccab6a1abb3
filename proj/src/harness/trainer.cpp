#include "irr/harness/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "irr/core/core_ops.hpp"
#include "irr/core/ops.hpp"
#include "irr/datagen/augment.hpp"

namespace irr::harness {

using core::Tensor;
using core::Var;
using models::Variant;

namespace {

Var to_size(const Var& v, int h, int w, bool is_flow) {
  if (!v.defined()) return v;
  if (v.height() == h && v.width() == w) return v;
  return is_flow ? core::resize_flow(v, h, w) : core::resize_bilinear(v, h, w);
}

// Flow GT resized to (h, w) keeping input-pixel units.
Tensor gt_flow_at(const Tensor& gt, int h, int w) {
  if (gt.height() == h && gt.width() == w) return gt;
  return core::resize_bilinear(core::constant(gt), h, w).value();
}

Tensor gt_occ_at(const Tensor& gt, int h, int w) {
  if (gt.height() == h && gt.width() == w) return gt;
  const int factor = gt.height() / h;
  if (factor < 1 || (gt.height() + factor - 1) / factor != h || (gt.width() + factor - 1) / factor != w) {
    throw core::InvalidArgument("occlusion GT cannot be reduced to " + std::to_string(h) + "x" +
                                std::to_string(w));
  }
  Tensor t = core::area_downsample(gt, factor);
  for (double& v : t.values()) v = v >= 0.5 ? 1.0 : 0.0;
  return t;
}

losses::TermInput make_term(const models::IterationState& s, const datagen::SceneSample& sample,
                            Supervision sup, bool native) {
  const int H = sample.image1.height(), W = sample.image1.width();
  const bool both = sup == Supervision::Both;
  losses::TermInput t;
  if (!native) {
    const Var fw = to_size(s.flow_fw, H, W, true);
    const Var bw = to_size(s.flow_bw, H, W, true);
    t.flow = losses::flow_loss(fw, bw, &sample.flow_fw.tensor(),
                               both ? &sample.flow_bw.tensor() : nullptr);
    if (s.occ1_logits.defined()) {
      const Var o1 = core::sigmoid(to_size(s.occ1_logits, H, W, false));
      const Var o2 = s.occ2_logits.defined() ? core::sigmoid(to_size(s.occ2_logits, H, W, false)) : Var();
      t.occ = losses::occ_loss(o1, o2, &sample.occ1.tensor(), both ? &sample.occ2.tensor() : nullptr);
    }
    return t;
  }
  const int h = s.flow_fw.height(), w = s.flow_fw.width();
  const std::vector<double> back{static_cast<double>(W) / w, static_cast<double>(H) / h};
  const Tensor gfw = gt_flow_at(sample.flow_fw.tensor(), h, w);
  Tensor gbw;
  if (both) gbw = gt_flow_at(sample.flow_bw.tensor(), h, w);
  const Var fw = core::scale_channels(s.flow_fw, back);
  const Var bw = s.flow_bw.defined() ? core::scale_channels(s.flow_bw, back) : Var();
  t.flow = losses::flow_loss(fw, bw, &gfw, both ? &gbw : nullptr);
  if (s.occ1_logits.defined()) {
    const Tensor g1 = gt_occ_at(sample.occ1.tensor(), h, w);
    Tensor g2;
    if (both) g2 = gt_occ_at(sample.occ2.tensor(), h, w);
    const Var o2 = s.occ2_logits.defined() ? s.occ2() : Var();
    t.occ = losses::occ_loss(s.occ1(), o2, &g1, both ? &g2 : nullptr);
  }
  return t;
}

struct AdamSlot {
  Tensor m, v;
};

double global_norm(const core::Gradients& g) {
  double s = 0.0;
  for (const auto& [name, ts] : g)
    for (const Tensor& t : ts)
      for (double v : t.values()) s += v * v;
  return std::sqrt(s);
}

void accumulate(core::Gradients& into, const core::Gradients& g) {
  for (const auto& [name, ts] : g) {
    auto& dst = into[name];
    if (dst.empty()) {
      dst = ts;
      continue;
    }
    for (std::size_t i = 0; i < ts.size(); ++i) dst[i] += ts[i];
  }
}

}  // namespace

std::size_t alpha_length(const models::ModelConfig& c) {
  if (c.variant == Variant::FlowNetIrr) return 1;
  return static_cast<std::size_t>(c.iterations) + (c.occ_upsampler ? c.output_level : 0);
}

losses::Objective sample_objective(const models::Model& model, const models::ForwardResult& fwd,
                                   const datagen::SceneSample& sample, Supervision supervision,
                                   const std::vector<double>& alpha) {
  const models::ModelConfig& c = model.config();
  std::vector<double> a = alpha;
  if (a.empty()) a.assign(alpha_length(c), 1.0);
  if (a.size() != alpha_length(c)) {
    throw core::InvalidArgument("alpha needs " + std::to_string(alpha_length(c)) + " entries");
  }
  if (c.variant == Variant::FlowNetIrr) {
    std::vector<std::vector<losses::TermInput>> grid;
    for (std::size_t i = 0; i < fwd.steps.size(); ++i) {
      const bool last = i + 1 == fwd.steps.size();
      grid.push_back({make_term(last ? fwd.output : fwd.steps[i], sample, supervision, false)});
    }
    return losses::total_loss_flownet(grid, a);
  }
  std::vector<losses::TermInput> levels;
  for (const auto& s : fwd.steps) levels.push_back(make_term(s, sample, supervision, true));
  for (const auto& s : fwd.upsampled) levels.push_back(make_term(s, sample, supervision, true));
  return losses::total_loss_pwc(levels, a);
}

TrainResult train(models::Model& model, const std::vector<const datagen::SceneSample*>& data,
                  const RunConfig& cfg, const std::function<void(const StepRecord&)>& on_step) {
  TrainResult result;
  const OptimizerConfig& opt = cfg.optimizer;
  if (opt.total_steps == 0) return result;
  if (data.empty()) throw TrainingError("training set is empty");

  std::map<std::string, std::vector<AdamSlot>> slots;
  for (const auto& set : model.registry().sets()) {
    auto& s = slots[set->name()];
    for (std::size_t i = 0; i < set->size(); ++i) {
      s.push_back({Tensor(set->tensor(i).shape(), 0.0), Tensor(set->tensor(i).shape(), 0.0)});
    }
  }

  std::vector<std::size_t> order(data.size());
  std::size_t cursor = order.size();
  std::uint64_t epoch = 0;
  auto next_index = [&] {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), 0);
      core::Rng rng(core::combine_seeds(cfg.seed, 0xE90C0000ull + epoch++));
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
      }
      cursor = 0;
    }
    return order[cursor++];
  };
  const datagen::AugmentConfig identity{};
  const nlohmann::json aug_json = cfg.augment, identity_json = identity;
  const bool augmenting = aug_json != identity_json;

  for (int step = 1; step <= opt.total_steps; ++step) {
    std::vector<datagen::SceneSample> batch;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const datagen::SceneSample& s = *data[next_index()];
      if (augmenting) {
        const auto seed = core::combine_seeds(cfg.seed, static_cast<std::uint64_t>(step) * 1000 + b);
        batch.push_back(datagen::augment(s, seed, cfg.augment));
      } else {
        batch.push_back(s);
      }
    }

    StepRecord rec;
    rec.step = step;
    rec.learning_rate = opt.decay_every > 0
                            ? opt.learning_rate * std::pow(opt.decay_factor, (step - 1) / opt.decay_every)
                            : opt.learning_rate;
    rec.samples.resize(batch.size());
    std::vector<double> totals(batch.size());
    core::Gradients grad_sum;

    auto run_sample = [&](std::size_t b) {
      models::ParamBinding binding(true);
      const datagen::SceneSample& s = batch[b];
      const auto fwd = models::forward(model, core::constant(s.image1.tensor()),
                                       core::constant(s.image2.tensor()), binding);
      losses::Objective obj = sample_objective(model, fwd, s, cfg.supervision, cfg.alpha);
      const double total = obj.total.value()[0];
      if (!std::isfinite(total)) {
        throw TrainingError("non-finite loss at step " + std::to_string(step) + " on sample " + s.id);
      }
      core::backward(obj.total);
      rec.samples[b] = std::move(obj.breakdown);
      totals[b] = total;
      return binding.gradients();
    };

    if (cfg.deterministic || cfg.threads <= 1) {
      for (std::size_t b = 0; b < batch.size(); ++b) accumulate(grad_sum, run_sample(b));
    } else {
      std::mutex mu;
      std::vector<std::thread> pool;
      std::exception_ptr error;
      const unsigned workers = std::min<unsigned>(cfg.threads, static_cast<unsigned>(batch.size()));
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t b = t; b < batch.size(); b += workers) {
              core::Gradients g = run_sample(b);
              std::lock_guard<std::mutex> lock(mu);
              accumulate(grad_sum, g);
            }
          } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!error) error = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      if (error) std::rethrow_exception(error);
    }

    double total = 0.0;
    for (double t : totals) total += t;
    rec.loss = total / static_cast<double>(batch.size());

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (auto& [name, ts] : grad_sum)
      for (Tensor& t : ts) t *= inv_b;
    double clip = 1.0;
    if (opt.grad_clip > 0.0) {
      const double norm = global_norm(grad_sum);
      if (!std::isfinite(norm)) throw TrainingError("non-finite gradient at step " + std::to_string(step));
      if (norm > opt.grad_clip) clip = opt.grad_clip / norm;
    }
    const double bc1 = 1.0 - std::pow(opt.beta1, step), bc2 = 1.0 - std::pow(opt.beta2, step);
    for (const auto& set : model.registry().sets()) {
      auto it = grad_sum.find(set->name());
      if (it == grad_sum.end()) continue;
      auto& s = slots[set->name()];
      for (std::size_t i = 0; i < set->size(); ++i) {
        Tensor& p = set->tensor(i);
        const Tensor& g = it->second[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
          const double gk = g[k] * clip;
          s[i].m[k] = opt.beta1 * s[i].m[k] + (1.0 - opt.beta1) * gk;
          s[i].v[k] = opt.beta2 * s[i].v[k] + (1.0 - opt.beta2) * gk * gk;
          p[k] -= rec.learning_rate * (s[i].m[k] / bc1) / (std::sqrt(s[i].v[k] / bc2) + opt.epsilon);
        }
      }
    }
    if (on_step) on_step(rec);
    result.log.push_back(std::move(rec));
  }
  return result;
}

namespace {

metrics::SampleRow score(const datagen::SceneSample& s, const core::FlowField& flow,
                         const core::OcclusionMap* occ, double threshold) {
  metrics::SampleRow row;
  row.id = s.id;
  const Tensor* valid = s.valid ? &*s.valid : nullptr;
  row.epe = metrics::epe(flow, s.flow_fw, valid);
  row.fl_all = metrics::fl_all(flow, s.flow_fw, valid);
  if (occ) row.occ = metrics::occ_f1(*occ, s.occ1, threshold);
  return row;
}

}  // namespace

metrics::EvalReport evaluate(const models::Model& model,
                             const std::vector<const datagen::SceneSample*>& samples,
                             double occ_threshold, unsigned threads) {
  if (samples.empty()) throw core::InvalidArgument("evaluation set is empty");
  std::vector<metrics::SampleRow> rows(samples.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < samples.size(); i += stride) {
      const datagen::SceneSample& s = *samples[i];
      models::ParamBinding binding(false);
      const auto fwd = models::forward(model, core::constant(s.image1.tensor()),
                                       core::constant(s.image2.tensor()), binding);
      const core::FlowField flow(fwd.output.flow_fw.value());
      std::optional<core::OcclusionMap> occ;
      if (fwd.output.occ1_logits.defined()) occ.emplace(fwd.output.occ1().value());
      rows[i] = score(s, flow, occ ? &*occ : nullptr, occ_threshold);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(samples.size())));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  return metrics::summarize(std::move(rows));
}

metrics::EvalReport evaluate_oracle(const std::vector<const datagen::SceneSample*>& samples) {
  if (samples.empty()) throw core::InvalidArgument("evaluation set is empty");
  std::vector<metrics::SampleRow> rows;
  for (const auto* s : samples) rows.push_back(score(*s, s->flow_fw, &s->occ1, 0.5));
  return metrics::summarize(std::move(rows));
}

metrics::EvalReport evaluate_zero(const std::vector<const datagen::SceneSample*>& samples) {
  if (samples.empty()) throw core::InvalidArgument("evaluation set is empty");
  std::vector<metrics::SampleRow> rows;
  for (const auto* s : samples) {
    const core::FlowField zero(s->flow_fw.height(), s->flow_fw.width());
    const core::OcclusionMap visible(s->occ1.height(), s->occ1.width());
    rows.push_back(score(*s, zero, &visible, 0.5));
  }
  return metrics::summarize(std::move(rows));
}

nlohmann::json step_json(const StepRecord& r) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& b : r.samples) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : b.terms) {
      terms.push_back({{"iteration", t.iteration},
                       {"scale", t.scale},
                       {"alpha", t.alpha},
                       {"flow", t.flow},
                       {"occ", t.occ},
                       {"lambda", t.lambda},
                       {"has_occ", t.has_occ}});
    }
    samples.push_back({{"total", b.total}, {"terms", terms}});
  }
  return {{"step", r.step}, {"lr", r.learning_rate}, {"loss", r.loss}, {"samples", samples}};
}

}  // namespace irr::harness
