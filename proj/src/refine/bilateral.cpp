#include "irr/refine/bilateral.hpp"

#include <string>

#include "irr/core/ops.hpp"

namespace irr::refine {

void validate_window(int window) {
  if (window < 1 || window % 2 == 0) {
    throw core::InvalidArgument("bilateral window must be odd and >= 1, got " +
                                std::to_string(window));
  }
}

void init_kernel_head(ParameterSet& set, int in_channels, const KernelHeadConfig& cfg,
                      core::Rng& rng) {
  validate_window(cfg.window);
  core::add_conv(set, "conv1", in_channels, cfg.width, 3, rng);
  core::add_conv(set, "conv2", cfg.width, cfg.width, 3, rng);
  core::add_conv(set, "logits", cfg.width, cfg.window * cfg.window, 3, rng, 0.1);
}

std::size_t kernel_head_parameter_count(int in_channels, const KernelHeadConfig& cfg) {
  return core::conv_parameter_count(in_channels, cfg.width, 3) +
         core::conv_parameter_count(cfg.width, cfg.width, 3) +
         core::conv_parameter_count(cfg.width, cfg.window * cfg.window, 3);
}

BilateralKernelField kernels_from_logits(const Var& logits, int window) {
  validate_window(window);
  if (logits.channels() != window * window) {
    throw core::InvalidArgument("kernel logits need " + std::to_string(window * window) +
                                " channels, got " + std::to_string(logits.channels()));
  }
  return {core::softmax_channels(logits), window};
}

BilateralKernelField run_kernel_head(const Var& input, ParamBinding& binding,
                                     const ParameterSet& head, int window) {
  validate_window(window);
  Var h = core::leaky_relu(core::apply_conv(binding, head, "conv1", input));
  h = core::leaky_relu(core::apply_conv(binding, head, "conv2", h));
  return kernels_from_logits(core::apply_conv(binding, head, "logits", h), window);
}

BilateralKernelField build_flow_kernels(const Var& feature, const Var& flow, ParamBinding& binding,
                                        const ParameterSet& head, int window) {
  validate_window(window);
  return run_kernel_head(core::concat_channels({feature, flow}), binding, head, window);
}

BilateralKernelField build_occ_kernels(const Var& occ, const Var& feature,
                                       const Var& warped_other_feature, ParamBinding& binding,
                                       const ParameterSet& head, int window) {
  validate_window(window);
  return run_kernel_head(core::concat_channels({occ, feature, warped_other_feature}), binding,
                         head, window);
}

Var apply_bilateral(const Var& field, const BilateralKernelField& kernels) {
  validate_window(kernels.window);
  const Var& kv = kernels.weights;
  const int w_n = kernels.window, r = w_n / 2;
  if (field.value().rank() != 3 || kv.value().rank() != 3 || kv.channels() != w_n * w_n ||
      kv.height() != field.height() || kv.width() != field.width()) {
    throw core::InvalidArgument("apply_bilateral: field " + core::shape_string(field.shape()) +
                                " and kernels " + core::shape_string(kv.shape()) +
                                " are not aligned");
  }
  const int c_n = field.channels(), h = field.height(), w = field.width();
  const core::Tensor& f = field.value();
  const core::Tensor& k = kv.value();
  core::Tensor out = core::Tensor::chw(c_n, h, w);
  for (int c = 0; c < c_n; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int j = 0; j < w_n; ++j) {
          const int yy = y + j - r;
          if (yy < 0 || yy >= h) continue;
          for (int i = 0; i < w_n; ++i) {
            const int xx = x + i - r;
            if (xx < 0 || xx >= w) continue;
            acc += k(j * w_n + i, y, x) * f(c, yy, xx);
          }
        }
        out(c, y, x) = acc;
      }
  return Var::make(std::move(out), {field, kv},
                   [pf = field.node(), pk = kv.node(), w_n, r](core::detail::Node& self) {
                     const core::Tensor& f = pf->value;
                     const core::Tensor& k = pk->value;
                     const int c_n = f.channels(), h = f.height(), w = f.width();
                     core::Tensor* gf = pf->requires_grad ? &pf->grad_buffer() : nullptr;
                     core::Tensor* gk = pk->requires_grad ? &pk->grad_buffer() : nullptr;
                     for (int c = 0; c < c_n; ++c)
                       for (int y = 0; y < h; ++y)
                         for (int x = 0; x < w; ++x) {
                           const double g = self.grad(c, y, x);
                           if (g == 0.0) continue;
                           for (int j = 0; j < w_n; ++j) {
                             const int yy = y + j - r;
                             if (yy < 0 || yy >= h) continue;
                             for (int i = 0; i < w_n; ++i) {
                               const int xx = x + i - r;
                               if (xx < 0 || xx >= w) continue;
                               const int ch = j * w_n + i;
                               if (gf) (*gf)(c, yy, xx) += g * k(ch, y, x);
                               if (gk) (*gk)(ch, y, x) += g * f(c, yy, xx);
                             }
                           }
                         }
                   });
}

}  // namespace irr::refine
