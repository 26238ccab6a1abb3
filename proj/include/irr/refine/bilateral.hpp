#pragma once

#include <cstddef>

#include "irr/core/autodiff.hpp"
#include "irr/core/params.hpp"

namespace irr::refine {

using core::ParamBinding;
using core::ParameterSet;
using core::Var;

inline constexpr int kDefaultWindow = 5;

/// Per-pixel w x w filter weights stored as (w*w, H, W). Channel j*w + i holds
/// the weight of the neighbour at offset (i - w/2, j - w/2).
struct BilateralKernelField {
  Var weights;
  int window = kDefaultWindow;

  int height() const { return weights.height(); }
  int width() const { return weights.width(); }
};

/// Kernel head: conv3x3 -> LReLU -> conv3x3 -> LReLU -> conv3x3 to w*w logits.
struct KernelHeadConfig {
  int window = kDefaultWindow;
  int width = 32;
};

void validate_window(int window);

void init_kernel_head(ParameterSet& set, int in_channels, const KernelHeadConfig& cfg,
                      core::Rng& rng);
std::size_t kernel_head_parameter_count(int in_channels, const KernelHeadConfig& cfg);

/// Softmax across the w*w logit channels.
BilateralKernelField kernels_from_logits(const Var& logits, int window);

/// Runs a kernel head on an arbitrary input stack.
BilateralKernelField run_kernel_head(const Var& input, ParamBinding& binding,
                                     const ParameterSet& head, int window);

/// Kernels from concat(feature, flow).
BilateralKernelField build_flow_kernels(const Var& feature, const Var& flow, ParamBinding& binding,
                                        const ParameterSet& head, int window = kDefaultWindow);

/// Kernels from concat(occ, feature, warped_other_feature); occ is a probability map.
BilateralKernelField build_occ_kernels(const Var& occ, const Var& feature,
                                       const Var& warped_other_feature, ParamBinding& binding,
                                       const ParameterSet& head, int window = kDefaultWindow);

/// Filters every channel of `field` with the per-pixel kernels; zero padding.
Var apply_bilateral(const Var& field, const BilateralKernelField& kernels);

}  // namespace irr::refine
