#pragma once

#include <vector>

#include "irr/core/autodiff.hpp"

// Generic differentiable primitives on Vars. Rank-3 inputs are (C, H, W).
namespace irr::core {

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
/// Multiplies channel c by factors[c]; factors.size() must equal channels.
Var scale_channels(const Var& a, const std::vector<double>& factors);

Var concat_channels(const std::vector<Var>& parts);
Var slice_channels(const Var& a, int begin, int count);

/// 2D convolution. weight: (out, in, k, k), bias: (out).
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad);

Var relu(const Var& x);
Var leaky_relu(const Var& x, double slope = 0.1);
Var sigmoid(const Var& x);
/// Values clamped into [lo, hi]; zero gradient where clamping is active.
Var clamp(const Var& x, double lo, double hi);

/// Per-pixel softmax across channels.
Var softmax_channels(const Var& x);

/// out(c, y, x) = in(c, y/2, x/2).
Var nearest_upsample_x2(const Var& x);

/// Sum of all elements, as a one-element Var.
Var sum(const Var& x);

}  // namespace irr::core
