#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "irr/core/autodiff.hpp"
#include "irr/core/ops.hpp"

namespace irr::testing {

/// Scalar-valued function of several Vars.
using ScalarFn = std::function<core::Var(const std::vector<core::Var>&)>;

struct GradCheck {
  /// max over inputs of ||analytic - numeric||_inf / max(||numeric||_inf, floor).
  double max_rel_error = 0.0;
  std::size_t evaluated = 0;
};

/// Compares reverse-mode gradients of `f` at `inputs` against central
/// differences with step `h`. `which` restricts the check to some inputs.
inline GradCheck grad_check(const ScalarFn& f, const std::vector<core::Tensor>& inputs,
                            double h = 1e-6, std::vector<bool> which = {}) {
  if (which.empty()) which.assign(inputs.size(), true);
  std::vector<core::Var> vars;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    vars.push_back(which[i] ? core::variable(inputs[i]) : core::constant(inputs[i]));
  }
  core::backward(f(vars));

  GradCheck out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!which[i]) continue;
    const core::Tensor analytic = vars[i].grad();
    core::Tensor numeric(inputs[i].shape());
    for (std::size_t k = 0; k < inputs[i].size(); ++k) {
      auto eval = [&](double delta) {
        std::vector<core::Var> probe;
        for (std::size_t j = 0; j < inputs.size(); ++j) {
          core::Tensor t = inputs[j];
          if (j == i) t[k] += delta;
          probe.push_back(core::constant(std::move(t)));
        }
        return f(probe).value()[0];
      };
      numeric[k] = (eval(h) - eval(-h)) / (2 * h);
      ++out.evaluated;
    }
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      diff = std::max(diff, std::abs(analytic[k] - numeric[k]));
      scale = std::max(scale, std::abs(numeric[k]));
    }
    out.max_rel_error = std::max(out.max_rel_error, diff / std::max(scale, 1e-8));
  }
  return out;
}

/// Sum of x * r for a fixed random weighting r, turning a tensor-valued op
/// into a scalar whose gradient exercises every output element.
inline core::Var weighted_sum(const core::Var& x, const core::Tensor& r) {
  return core::sum(core::mul(x, core::constant(r)));
}

}  // namespace irr::testing
