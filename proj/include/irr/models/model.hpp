#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "irr/core/autodiff.hpp"
#include "irr/core/params.hpp"
#include "irr/models/config.hpp"
#include "irr/refine/occ_upsampler.hpp"

namespace irr::models {

using core::ParamBinding;
using core::ParameterSet;
using core::Var;

/// Element k-1 holds pyramid level k (stride 2^k).
using FeaturePyramid = std::vector<Var>;

/// Estimates after one IRR step, at the step's native resolution.
///
/// Occlusion is carried as logits; occ1()/occ2() give probabilities.
/// Backward and occlusion entries are undefined when the model does not
/// produce them.
struct IterationState {
  int step = 0;
  /// Pyramid level of the estimate; 0 means input resolution.
  int level = 0;
  Var flow_fw, flow_bw;
  Var occ1_logits, occ2_logits;

  Var occ1() const;
  Var occ2() const;
};

/// A configured network and its parameter registry.
///
/// Every block is registered once and initialised from its own seed derived
/// from (init_seed, block name), so toggling one block leaves the initial
/// values of all others unchanged.
class Model {
 public:
  explicit Model(ModelConfig config);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return config_; }
  core::ParameterRegistry& registry() { return registry_; }
  const core::ParameterRegistry& registry() const { return registry_; }

  const ParameterSet& encoder() const { return *encoder_; }
  /// Decoder applied at `step` (1-based); the same object for every step in shared mode.
  const ParameterSet& flow_decoder(int step) const;
  const ParameterSet& occ_decoder(int step) const;
  /// 1x1 adapter of pyramid `level` (shared pwc-irr only); every level has one.
  const ParameterSet& adapter(int level) const;
  const ParameterSet& flow_kernel_head(int step) const;
  const ParameterSet& occ_kernel_head(int step) const;
  const ParameterSet& upsampler_stack() const;
  const ParameterSet& upsampler_adapter(int level) const;

  /// Channels of the features the decoders see at `level`.
  int decoder_feature_channels(int level) const;
  /// Pyramid level processed at `step` (1-based).
  int level_of_step(int step) const;
  refine::ResBlockStackConfig upsampler_config() const;

 private:
  std::shared_ptr<ParameterSet> make_block(const std::string& name);
  const ParameterSet& pick(const std::vector<std::shared_ptr<ParameterSet>>& sets, int step,
                           const char* what) const;

  ModelConfig config_;
  core::ParameterRegistry registry_;
  std::shared_ptr<ParameterSet> encoder_;
  std::vector<std::shared_ptr<ParameterSet>> flow_decoders_, occ_decoders_;
  std::map<int, std::shared_ptr<ParameterSet>> adapters_;
  std::vector<std::shared_ptr<ParameterSet>> flow_heads_, occ_heads_;
  std::shared_ptr<ParameterSet> upsampler_;
  std::map<int, std::shared_ptr<ParameterSet>> upsampler_adapters_;
};

/// Strided convolutional pyramid with `levels` levels; each level is a
/// stride-2 conv and a stride-1 conv, both followed by LeakyReLU(0.1).
FeaturePyramid encode(const Var& image, ParamBinding& binding, const ParameterSet& encoder,
                      int levels);
FeaturePyramid encode(const Model& model, const Var& image, ParamBinding& binding);

/// conv1..conv{L-1} with LeakyReLU, then the linear "out" conv.
Var decode(const Var& input, ParamBinding& binding, const ParameterSet& decoder);

/// Applies one decoder to both directions' inputs. `in_bw` may be undefined,
/// in which case only the forward output is produced.
std::pair<Var, Var> bidirectional_apply(const ParameterSet& decoder, const Var& in_fw,
                                        const Var& in_bw, ParamBinding& binding,
                                        const std::string& role);

Var occlusion_decode_logits(const Var& input, ParamBinding& binding, const ParameterSet& decoder);
/// Sigmoid of the occlusion decoder output.
Var occlusion_decode(const Var& input, ParamBinding& binding, const ParameterSet& decoder);

/// Zero flow (and zero occlusion logits) at the given level and size.
IterationState initial_state(const Model& model, int level, int height, int width);

/// f^i = D(F1, warp(F2, f^{i-1})) + f^{i-1} at the configured warp level,
/// followed by bilateral refinement when enabled.
IterationState irr_flownet_step(const Model& model, ParamBinding& binding,
                                const IterationState& prev, const FeaturePyramid& p1,
                                const FeaturePyramid& p2);

/// One coarse-to-fine step at pyramid `level`: resize the previous estimate,
/// warp, correlate, decode a residual through the level's adapter, add.
/// An undefined previous flow starts from zero.
IterationState irr_pwc_step(const Model& model, ParamBinding& binding, const IterationState& prev,
                            const FeaturePyramid& p1, const FeaturePyramid& p2, int level);

struct ForwardResult {
  /// One state per IRR step, in order.
  std::vector<IterationState> steps;
  /// Occlusion-upsampler stages, coarse to fine; empty when disabled.
  std::vector<IterationState> upsampled;
  /// Final estimates at input resolution.
  IterationState output;
};

ForwardResult forward(const Model& model, const Var& image1, const Var& image2,
                      ParamBinding& binding);

struct ParameterCount {
  std::size_t total = 0;
  std::map<std::string, std::size_t> by_block;
};

ParameterCount count_parameters(const Model& model);

}  // namespace irr::models
