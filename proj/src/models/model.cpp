#include "irr/models/model.hpp"

#include <cmath>
#include <string>

#include "irr/core/core_ops.hpp"
#include "irr/core/ops.hpp"
#include "irr/refine/bilateral.hpp"

namespace irr::models {

using core::InvalidArgument;

namespace {

std::string level_name(int level) { return "level" + std::to_string(level); }

void add_decoder(ParameterSet& set, int in, int out, int width, int layers, core::Rng& rng) {
  int c = in;
  for (int l = 1; l < layers; ++l) {
    core::add_conv(set, "conv" + std::to_string(l), c, width, 3, rng);
    c = width;
  }
  core::add_conv(set, "out", c, out, 3, rng, 0.1);
}

void add_adapter(ParameterSet& set, int in, int out, core::Rng& rng) {
  core::Tensor w({out, in, 1, 1});
  const double bound = std::sqrt(3.0 / in);
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  set.add("weight", std::move(w));
  set.add("bias", core::Tensor({out}, 0.0));
}

void require_size(const Var& v, int h, int w, const char* what) {
  if (v.height() != h || v.width() != w) {
    throw InvalidArgument(std::string(what) + ": estimate " + core::shape_string(v.shape()) +
                          " does not match features of size " + std::to_string(h) + "x" +
                          std::to_string(w));
  }
}

Var resize_flow_to(const Var& flow, int h, int w) {
  if (!flow.defined()) return core::zeros(2, h, w);
  if (flow.height() == h && flow.width() == w) return flow;
  return core::resize_flow(flow, h, w);
}

Var resize_map_to(const Var& map, int h, int w) {
  if (!map.defined()) return core::zeros(1, h, w);
  if (map.height() == h && map.width() == w) return map;
  return core::resize_bilinear(map, h, w);
}

// Bilateral refinement of a freshly decoded state. a1/a2 are the features the
// decoders saw for frame 1 and frame 2 at this resolution.
void refine_state(const Model& model, ParamBinding& binding, IterationState& s, const Var& a1,
                  const Var& a2) {
  const int window = model.config().bilateral_window;
  const std::string tag = "/step" + std::to_string(s.step);
  const ParameterSet& fh = model.flow_kernel_head(s.step);
  binding.note_use("flow_kernels" + tag + "/fw", fh);
  s.flow_fw = refine::apply_bilateral(
      s.flow_fw, refine::build_flow_kernels(a1, s.flow_fw, binding, fh, window));
  if (s.flow_bw.defined()) {
    binding.note_use("flow_kernels" + tag + "/bw", fh);
    s.flow_bw = refine::apply_bilateral(
        s.flow_bw, refine::build_flow_kernels(a2, s.flow_bw, binding, fh, window));
  }
  if (!s.occ1_logits.defined()) return;
  const ParameterSet& oh = model.occ_kernel_head(s.step);
  binding.note_use("occ_kernels" + tag + "/fw", oh);
  s.occ1_logits = refine::apply_bilateral(
      s.occ1_logits,
      refine::build_occ_kernels(core::sigmoid(s.occ1_logits), a1,
                                core::bilinear_warp(a2, s.flow_fw), binding, oh, window));
  if (s.occ2_logits.defined()) {
    binding.note_use("occ_kernels" + tag + "/bw", oh);
    s.occ2_logits = refine::apply_bilateral(
        s.occ2_logits,
        refine::build_occ_kernels(core::sigmoid(s.occ2_logits), a2,
                                  core::bilinear_warp(a1, s.flow_bw), binding, oh, window));
  }
}

}  // namespace

Var IterationState::occ1() const { return core::sigmoid(occ1_logits); }
Var IterationState::occ2() const { return core::sigmoid(occ2_logits); }

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const ModelConfig& c = config_;
  const int levels = c.pyramid_levels();
  const int n = c.iterations;

  encoder_ = make_block("encoder");
  {
    core::Rng rng(core::combine_seeds(c.init_seed, core::fnv1a64("encoder")));
    int in = 3;
    for (int k = 1; k <= levels; ++k) {
      const int out = c.encoder_channels[k - 1];
      core::add_conv(*encoder_, level_name(k) + ".a", in, out, 3, rng);
      core::add_conv(*encoder_, level_name(k) + ".b", out, out, 3, rng);
      in = out;
    }
  }

  const int span = 2 * c.cost_volume_range + 1;
  auto flow_input = [&](int step) {
    const int level = level_of_step(step);
    if (c.variant == Variant::FlowNetIrr) return 2 * decoder_feature_channels(level);
    return decoder_feature_channels(level) + span * span + 2;
  };
  const int decoders = c.sharing == SharingMode::Shared ? 1 : n;
  auto suffix = [&](int i, int count) { return count == 1 ? std::string() : "." + std::to_string(i); };

  for (int i = 1; i <= decoders; ++i) {
    const std::string name = "decoder.flow" + suffix(i, decoders);
    auto set = make_block(name);
    core::Rng rng(core::combine_seeds(c.init_seed, core::fnv1a64(name)));
    add_decoder(*set, flow_input(i), 2, c.decoder_width, c.decoder_layers, rng);
    flow_decoders_.push_back(set);
  }
  if (c.occlusion) {
    for (int i = 1; i <= decoders; ++i) {
      const std::string name = "decoder.occ" + suffix(i, decoders);
      auto set = make_block(name);
      core::Rng rng(core::combine_seeds(c.init_seed, core::fnv1a64(name)));
      const int in = flow_input(i) + (c.variant == Variant::PwcIrr ? 1 : 0);
      add_decoder(*set, in, 1, c.decoder_width, c.decoder_layers, rng);
      occ_decoders_.push_back(set);
    }
  }
  if (c.uses_adapters()) {
    // Adapters belong to the pyramid like the encoder levels they read, so the
    // count does not depend on how many levels the decoder visits.
    for (int k = 1; k <= levels; ++k) {
      const std::string name = "adapter." + level_name(k);
      auto set = make_block(name);
      core::Rng rng(core::combine_seeds(c.init_seed, core::fnv1a64(name)));
      add_adapter(*set, c.encoder_channels[k - 1], c.adapter_channels, rng);
      adapters_[k] = set;
    }
  }
  if (c.bilateral) {
    const int heads = c.per_step_bilateral() ? n : 1;
    for (int i = 1; i <= heads; ++i) {
      const int f = decoder_feature_channels(level_of_step(i));
      const refine::KernelHeadConfig hc{c.bilateral_window, c.bilateral_width};
      const std::string fname = "bilateral.flow" + suffix(i, heads);
      auto fset = make_block(fname);
      core::Rng frng(core::combine_seeds(c.init_seed, core::fnv1a64(fname)));
      refine::init_kernel_head(*fset, f + 2, hc, frng);
      flow_heads_.push_back(fset);
      if (c.occlusion) {
        const std::string oname = "bilateral.occ" + suffix(i, heads);
        auto oset = make_block(oname);
        core::Rng orng(core::combine_seeds(c.init_seed, core::fnv1a64(oname)));
        refine::init_kernel_head(*oset, 1 + 2 * f, hc, orng);
        occ_heads_.push_back(oset);
      }
    }
  }
  if (c.occ_upsampler) {
    upsampler_ = make_block("upsampler.resblocks");
    core::Rng rng(core::combine_seeds(c.init_seed, core::fnv1a64("upsampler.resblocks")));
    refine::init_resblock_stack(*upsampler_,
                                refine::upsampler_input_channels(c.upsampler_feature_channels),
                                upsampler_config(), rng);
    for (int k = c.estimate_level(); k >= 1; --k) {
      const std::string name = "upsampler.adapter." + level_name(k);
      auto set = make_block(name);
      core::Rng arng(core::combine_seeds(c.init_seed, core::fnv1a64(name)));
      add_adapter(*set, c.encoder_channels[k - 1], c.upsampler_feature_channels, arng);
      upsampler_adapters_[k] = set;
    }
  }
}

std::shared_ptr<ParameterSet> Model::make_block(const std::string& name) {
  return registry_.create(name);
}

const ParameterSet& Model::pick(const std::vector<std::shared_ptr<ParameterSet>>& sets, int step,
                                const char* what) const {
  if (sets.empty()) throw InvalidArgument(std::string("model has no ") + what);
  if (step < 1 || step > config_.iterations) {
    throw InvalidArgument(std::string(what) + ": step " + std::to_string(step) + " out of range");
  }
  return sets.size() == 1 ? *sets.front() : *sets[step - 1];
}

const ParameterSet& Model::flow_decoder(int step) const {
  return pick(flow_decoders_, step, "flow decoder");
}
const ParameterSet& Model::occ_decoder(int step) const {
  return pick(occ_decoders_, step, "occlusion decoder");
}
const ParameterSet& Model::flow_kernel_head(int step) const {
  return pick(flow_heads_, step, "flow kernel head");
}
const ParameterSet& Model::occ_kernel_head(int step) const {
  return pick(occ_heads_, step, "occlusion kernel head");
}

const ParameterSet& Model::adapter(int level) const {
  auto it = adapters_.find(level);
  if (it == adapters_.end()) throw InvalidArgument("no adapter for " + level_name(level));
  return *it->second;
}

const ParameterSet& Model::upsampler_stack() const {
  if (!upsampler_) throw InvalidArgument("model has no occlusion upsampler");
  return *upsampler_;
}

const ParameterSet& Model::upsampler_adapter(int level) const {
  auto it = upsampler_adapters_.find(level);
  if (it == upsampler_adapters_.end()) {
    throw InvalidArgument("no upsampler adapter for " + level_name(level));
  }
  return *it->second;
}

int Model::decoder_feature_channels(int level) const {
  if (config_.uses_adapters()) return config_.adapter_channels;
  return config_.encoder_channels.at(level - 1);
}

int Model::level_of_step(int step) const {
  if (config_.variant == Variant::FlowNetIrr) return config_.estimate_level();
  return config_.pyramid_levels() - step + 1;
}

refine::ResBlockStackConfig Model::upsampler_config() const {
  refine::ResBlockStackConfig rc;
  rc.width = config_.upsampler_width;
  return rc;
}

FeaturePyramid encode(const Var& image, ParamBinding& binding, const ParameterSet& encoder,
                      int levels) {
  if (image.value().rank() != 3 || image.channels() != 3) {
    throw InvalidArgument("encode: expected a (3,H,W) image, got " +
                          core::shape_string(image.shape()));
  }
  FeaturePyramid out;
  Var x = image;
  for (int k = 1; k <= levels; ++k) {
    x = core::leaky_relu(core::apply_conv(binding, encoder, level_name(k) + ".a", x, 2));
    x = core::leaky_relu(core::apply_conv(binding, encoder, level_name(k) + ".b", x));
    out.push_back(x);
  }
  return out;
}

FeaturePyramid encode(const Model& model, const Var& image, ParamBinding& binding) {
  binding.note_use("encoder", model.encoder());
  return encode(image, binding, model.encoder(), model.config().pyramid_levels());
}

Var decode(const Var& input, ParamBinding& binding, const ParameterSet& decoder) {
  Var h = input;
  for (int l = 1; decoder.contains("conv" + std::to_string(l) + ".weight"); ++l) {
    h = core::leaky_relu(core::apply_conv(binding, decoder, "conv" + std::to_string(l), h));
  }
  return core::apply_conv(binding, decoder, "out", h);
}

std::pair<Var, Var> bidirectional_apply(const ParameterSet& decoder, const Var& in_fw,
                                        const Var& in_bw, ParamBinding& binding,
                                        const std::string& role) {
  std::pair<Var, Var> out;
  binding.note_use(role + "/fw", decoder);
  out.first = decode(in_fw, binding, decoder);
  if (in_bw.defined()) {
    if (in_bw.shape() != in_fw.shape()) {
      throw InvalidArgument("bidirectional_apply: direction inputs differ in shape");
    }
    binding.note_use(role + "/bw", decoder);
    out.second = decode(in_bw, binding, decoder);
  }
  return out;
}

Var occlusion_decode_logits(const Var& input, ParamBinding& binding, const ParameterSet& decoder) {
  return decode(input, binding, decoder);
}

Var occlusion_decode(const Var& input, ParamBinding& binding, const ParameterSet& decoder) {
  return core::sigmoid(occlusion_decode_logits(input, binding, decoder));
}

IterationState initial_state(const Model& model, int level, int height, int width) {
  const ModelConfig& c = model.config();
  IterationState s;
  s.level = level;
  s.flow_fw = core::zeros(2, height, width);
  if (c.bidirectional) s.flow_bw = core::zeros(2, height, width);
  if (c.occlusion) {
    s.occ1_logits = core::zeros(1, height, width);
    if (c.bidirectional) s.occ2_logits = core::zeros(1, height, width);
  }
  return s;
}

IterationState irr_flownet_step(const Model& model, ParamBinding& binding,
                                const IterationState& prev, const FeaturePyramid& p1,
                                const FeaturePyramid& p2) {
  const ModelConfig& c = model.config();
  if (c.variant != Variant::FlowNetIrr) throw InvalidArgument("irr_flownet_step on a pwc-irr model");
  const int wl = c.estimate_level();
  if (static_cast<int>(p1.size()) < wl || static_cast<int>(p2.size()) < wl) {
    throw InvalidArgument("irr_flownet_step: pyramid too shallow");
  }
  const Var& f1 = p1[wl - 1];
  const Var& f2 = p2[wl - 1];
  require_size(prev.flow_fw, f1.height(), f1.width(), "irr_flownet_step");

  IterationState next;
  next.step = prev.step + 1;
  next.level = wl;
  const std::string tag = "/step" + std::to_string(next.step);
  const Var in_fw = core::concat_channels({f1, core::bilinear_warp(f2, prev.flow_fw)});
  Var in_bw;
  if (c.bidirectional) {
    require_size(prev.flow_bw, f2.height(), f2.width(), "irr_flownet_step");
    in_bw = core::concat_channels({f2, core::bilinear_warp(f1, prev.flow_bw)});
  }
  auto [r_fw, r_bw] = bidirectional_apply(model.flow_decoder(next.step), in_fw, in_bw, binding,
                                          "flow_decoder" + tag);
  next.flow_fw = core::add(prev.flow_fw, r_fw);
  if (c.bidirectional) next.flow_bw = core::add(prev.flow_bw, r_bw);
  if (c.occlusion) {
    auto [o_fw, o_bw] = bidirectional_apply(model.occ_decoder(next.step), in_fw, in_bw, binding,
                                            "occ_decoder" + tag);
    next.occ1_logits = core::add(prev.occ1_logits, o_fw);
    if (c.bidirectional) next.occ2_logits = core::add(prev.occ2_logits, o_bw);
  }
  if (c.bilateral) refine_state(model, binding, next, f1, f2);
  return next;
}

IterationState irr_pwc_step(const Model& model, ParamBinding& binding, const IterationState& prev,
                            const FeaturePyramid& p1, const FeaturePyramid& p2, int level) {
  const ModelConfig& c = model.config();
  if (c.variant != Variant::PwcIrr) throw InvalidArgument("irr_pwc_step on a flownet-irr model");
  if (level < c.output_level || level > c.pyramid_levels() ||
      level > static_cast<int>(p1.size()) || level > static_cast<int>(p2.size())) {
    throw InvalidArgument("irr_pwc_step: level " + std::to_string(level) + " out of range");
  }
  const Var& f1 = p1[level - 1];
  const Var& f2 = p2[level - 1];
  const int h = f1.height(), w = f1.width();

  IterationState next;
  next.step = prev.step + 1;
  next.level = level;
  const std::string tag = "/step" + std::to_string(next.step);

  Var a1 = f1, a2 = f2;
  if (c.uses_adapters()) {
    const ParameterSet& ad = model.adapter(level);
    binding.note_use("adapter/" + level_name(level) + "/fw", ad);
    a1 = core::channel_adapter(f1, c.adapter_channels, binding, ad);
    if (c.bidirectional || c.bilateral) {
      binding.note_use("adapter/" + level_name(level) + "/bw", ad);
      a2 = core::channel_adapter(f2, c.adapter_channels, binding, ad);
    }
  }

  const Var up_fw = resize_flow_to(prev.flow_fw, h, w);
  const Var cv_fw = core::cost_volume(f1, core::bilinear_warp(f2, up_fw), c.cost_volume_range);
  const Var in_fw = core::concat_channels({a1, cv_fw, up_fw});
  Var up_bw, in_bw;
  if (c.bidirectional) {
    up_bw = resize_flow_to(prev.flow_bw, h, w);
    const Var cv_bw = core::cost_volume(f2, core::bilinear_warp(f1, up_bw), c.cost_volume_range);
    in_bw = core::concat_channels({a2, cv_bw, up_bw});
  }
  auto [r_fw, r_bw] = bidirectional_apply(model.flow_decoder(next.step), in_fw, in_bw, binding,
                                          "flow_decoder" + tag);
  next.flow_fw = core::add(up_fw, r_fw);
  if (c.bidirectional) next.flow_bw = core::add(up_bw, r_bw);

  if (c.occlusion) {
    const Var o1 = resize_map_to(prev.occ1_logits, h, w);
    Var o2, oin_bw;
    if (c.bidirectional) {
      o2 = resize_map_to(prev.occ2_logits, h, w);
      oin_bw = core::concat_channels({in_bw, o2});
    }
    auto [d_fw, d_bw] = bidirectional_apply(model.occ_decoder(next.step),
                                            core::concat_channels({in_fw, o1}), oin_bw, binding,
                                            "occ_decoder" + tag);
    next.occ1_logits = core::add(o1, d_fw);
    if (c.bidirectional) next.occ2_logits = core::add(o2, d_bw);
  }
  if (c.bilateral) refine_state(model, binding, next, a1, a2);
  return next;
}

ForwardResult forward(const Model& model, const Var& image1, const Var& image2,
                      ParamBinding& binding) {
  const ModelConfig& c = model.config();
  core::require_same_shape(image1.value(), image2.value(), "forward");
  const FeaturePyramid p1 = encode(model, image1, binding);
  const FeaturePyramid p2 = encode(model, image2, binding);

  ForwardResult result;
  if (c.variant == Variant::FlowNetIrr) {
    const Var& f = p1[c.estimate_level() - 1];
    IterationState state = initial_state(model, c.estimate_level(), f.height(), f.width());
    for (int i = 0; i < c.iterations; ++i) {
      state = irr_flownet_step(model, binding, state, p1, p2);
      result.steps.push_back(state);
    }
  } else {
    IterationState state;
    for (int level = c.pyramid_levels(); level >= c.output_level; --level) {
      state = irr_pwc_step(model, binding, state, p1, p2, level);
      result.steps.push_back(state);
    }
  }

  const int h = image1.height(), w = image1.width();
  IterationState cur = result.steps.back();
  if (c.occ_upsampler) {
    const ParameterSet& stack = model.upsampler_stack();
    const refine::ResBlockStackConfig rc = model.upsampler_config();
    const int uf = c.upsampler_feature_channels;
    for (int k = cur.level; k >= 1; --k) {
      const int th = k == 1 ? h : p1[k - 2].height();
      const int tw = k == 1 ? w : p1[k - 2].width();
      if (th != 2 * cur.flow_fw.height() || tw != 2 * cur.flow_fw.width()) {
        throw InvalidArgument("occlusion upsampler needs exact 2x level sizes; use input sizes "
                              "divisible by 2^levels");
      }
      const ParameterSet& ad = model.upsampler_adapter(k);
      binding.note_use("upsampler_adapter/" + level_name(k), ad);
      const Var g1 = core::channel_adapter(p1[k - 1], uf, binding, ad);
      const Var g2 = core::channel_adapter(p2[k - 1], uf, binding, ad);
      IterationState nxt;
      nxt.step = cur.step;
      nxt.level = k - 1;
      binding.note_use("upsampler/" + level_name(k) + "/fw", stack);
      nxt.occ1_logits = refine::occlusion_upsample(cur.occ1_logits, cur.flow_fw, cur.flow_bw, g1,
                                                   g2, binding, stack, rc);
      binding.note_use("upsampler/" + level_name(k) + "/bw", stack);
      nxt.occ2_logits = refine::occlusion_upsample(cur.occ2_logits, cur.flow_bw, cur.flow_fw, g2,
                                                   g1, binding, stack, rc);
      nxt.flow_fw = core::upsample_flow_x2(cur.flow_fw);
      nxt.flow_bw = core::upsample_flow_x2(cur.flow_bw);
      result.upsampled.push_back(nxt);
      cur = nxt;
    }
    result.output = cur;
  } else {
    IterationState out;
    out.step = cur.step;
    out.level = 0;
    out.flow_fw = resize_flow_to(cur.flow_fw, h, w);
    if (cur.flow_bw.defined()) out.flow_bw = resize_flow_to(cur.flow_bw, h, w);
    if (cur.occ1_logits.defined()) out.occ1_logits = resize_map_to(cur.occ1_logits, h, w);
    if (cur.occ2_logits.defined()) out.occ2_logits = resize_map_to(cur.occ2_logits, h, w);
    result.output = out;
  }
  return result;
}

ParameterCount count_parameters(const Model& model) {
  ParameterCount pc;
  pc.by_block = model.registry().breakdown();
  pc.total = model.registry().parameter_count();
  return pc;
}

}  // namespace irr::models
