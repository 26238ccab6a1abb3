#include "irr/core/core_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "irr/core/ops.hpp"

namespace irr::core {
namespace {

void require_rank3(const Var& v, const char* what) {
  if (!v.defined() || v.value().rank() != 3) {
    throw InvalidArgument(std::string(what) + ": expected a (C,H,W) tensor");
  }
}

struct Corner {
  int x0, y0;
  double ax, ay;
};

Corner corner_at(double px, double py) {
  const double fx = std::floor(px), fy = std::floor(py);
  return {static_cast<int>(fx), static_cast<int>(fy), px - fx, py - fy};
}

// Interpolation taps of one axis for align_corners = false resizing.
struct AxisTaps {
  std::vector<int> lo, hi;
  std::vector<double> frac;
};

AxisTaps make_taps(int in, int out) {
  AxisTaps t;
  t.lo.resize(out);
  t.hi.resize(out);
  t.frac.resize(out);
  const double ratio = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double s = (o + 0.5) * ratio - 0.5;
    if (s < 0.0) s = 0.0;
    int i0 = static_cast<int>(std::floor(s));
    if (i0 > in - 1) i0 = in - 1;
    t.lo[o] = i0;
    t.hi[o] = std::min(i0 + 1, in - 1);
    t.frac[o] = s - i0;
  }
  return t;
}

}  // namespace

Var bilinear_warp(const Var& src, const Var& flow) {
  require_rank3(src, "bilinear_warp");
  require_rank3(flow, "bilinear_warp");
  if (flow.channels() != 2) throw InvalidArgument("bilinear_warp: flow must have 2 channels");
  if (src.height() != flow.height() || src.width() != flow.width()) {
    throw InvalidArgument("bilinear_warp: src " + shape_string(src.shape()) + " and flow " +
                          shape_string(flow.shape()) + " differ in spatial size");
  }
  const int c_n = src.channels(), h = src.height(), w = src.width();
  const Tensor& s = src.value();
  const Tensor& f = flow.value();
  Tensor out = Tensor::chw(c_n, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Corner k = corner_at(x + f(0, y, x), y + f(1, y, x));
      const int xs[2] = {k.x0, k.x0 + 1};
      const int ys[2] = {k.y0, k.y0 + 1};
      const double wx[2] = {1.0 - k.ax, k.ax};
      const double wy[2] = {1.0 - k.ay, k.ay};
      for (int j = 0; j < 2; ++j) {
        if (ys[j] < 0 || ys[j] >= h) continue;
        for (int i = 0; i < 2; ++i) {
          if (xs[i] < 0 || xs[i] >= w) continue;
          const double wt = wx[i] * wy[j];
          for (int c = 0; c < c_n; ++c) out(c, y, x) += wt * s(c, ys[j], xs[i]);
        }
      }
    }
  }
  return Var::make(std::move(out), {src, flow}, [ps = src.node(), pf = flow.node()](detail::Node& self) {
    const Tensor& s = ps->value;
    const Tensor& f = pf->value;
    const int c_n = s.channels(), h = s.height(), w = s.width();
    Tensor* gs = ps->requires_grad ? &ps->grad_buffer() : nullptr;
    Tensor* gf = pf->requires_grad ? &pf->grad_buffer() : nullptr;
    auto sample = [&](int c, int yy, int xx) {
      return (yy < 0 || yy >= h || xx < 0 || xx >= w) ? 0.0 : s(c, yy, xx);
    };
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Corner k = corner_at(x + f(0, y, x), y + f(1, y, x));
        const int x1 = k.x0 + 1, y1 = k.y0 + 1;
        double du = 0.0, dv = 0.0;
        for (int c = 0; c < c_n; ++c) {
          const double g = self.grad(c, y, x);
          if (g == 0.0) continue;
          const double v00 = sample(c, k.y0, k.x0), v01 = sample(c, k.y0, x1);
          const double v10 = sample(c, y1, k.x0), v11 = sample(c, y1, x1);
          du += g * ((1.0 - k.ay) * (v01 - v00) + k.ay * (v11 - v10));
          dv += g * ((1.0 - k.ax) * (v10 - v00) + k.ax * (v11 - v01));
          if (gs) {
            auto scatter = [&](int yy, int xx, double wt) {
              if (yy >= 0 && yy < h && xx >= 0 && xx < w) (*gs)(c, yy, xx) += g * wt;
            };
            scatter(k.y0, k.x0, (1.0 - k.ax) * (1.0 - k.ay));
            scatter(k.y0, x1, k.ax * (1.0 - k.ay));
            scatter(y1, k.x0, (1.0 - k.ax) * k.ay);
            scatter(y1, x1, k.ax * k.ay);
          }
        }
        if (gf) {
          (*gf)(0, y, x) += du;
          (*gf)(1, y, x) += dv;
        }
      }
    }
  });
}

Var cost_volume(const Var& f1, const Var& f2, int max_displacement) {
  require_rank3(f1, "cost_volume");
  require_same_shape(f1.value(), f2.value(), "cost_volume");
  if (max_displacement < 0) throw InvalidArgument("cost_volume: max displacement must be >= 0");
  const int d = max_displacement, span = 2 * d + 1;
  const int c_n = f1.channels(), h = f1.height(), w = f1.width();
  const Tensor& a = f1.value();
  const Tensor& b = f2.value();
  Tensor out = Tensor::chw(span * span, h, w);
  for (int dy = -d; dy <= d; ++dy) {
    for (int dx = -d; dx <= d; ++dx) {
      const int k = (dy + d) * span + (dx + d);
      const int y_lo = std::max(0, -dy), y_hi = std::min(h, h - dy);
      const int x_lo = std::max(0, -dx), x_hi = std::min(w, w - dx);
      for (int c = 0; c < c_n; ++c)
        for (int y = y_lo; y < y_hi; ++y)
          for (int x = x_lo; x < x_hi; ++x) out(k, y, x) += a(c, y, x) * b(c, y + dy, x + dx);
      for (double& v : out.plane(k)) v /= c_n;
    }
  }
  return Var::make(std::move(out), {f1, f2}, [pa = f1.node(), pb = f2.node(), d](detail::Node& self) {
    const Tensor& a = pa->value;
    const Tensor& b = pb->value;
    const int span = 2 * d + 1;
    const int c_n = a.channels(), h = a.height(), w = a.width();
    Tensor* ga = pa->requires_grad ? &pa->grad_buffer() : nullptr;
    Tensor* gb = pb->requires_grad ? &pb->grad_buffer() : nullptr;
    const double inv = 1.0 / c_n;
    for (int dy = -d; dy <= d; ++dy) {
      for (int dx = -d; dx <= d; ++dx) {
        const int k = (dy + d) * span + (dx + d);
        const int y_lo = std::max(0, -dy), y_hi = std::min(h, h - dy);
        const int x_lo = std::max(0, -dx), x_hi = std::min(w, w - dx);
        for (int c = 0; c < c_n; ++c) {
          for (int y = y_lo; y < y_hi; ++y) {
            for (int x = x_lo; x < x_hi; ++x) {
              const double g = self.grad(k, y, x) * inv;
              if (ga) (*ga)(c, y, x) += g * b(c, y + dy, x + dx);
              if (gb) (*gb)(c, y + dy, x + dx) += g * a(c, y, x);
            }
          }
        }
      }
    }
  });
}

Var resize_bilinear(const Var& x, int target_h, int target_w) {
  require_rank3(x, "resize_bilinear");
  if (target_h < 1 || target_w < 1) {
    throw InvalidArgument("resize_bilinear: target size must be >= 1, got " +
                          std::to_string(target_h) + "x" + std::to_string(target_w));
  }
  const int c_n = x.channels(), h = x.height(), w = x.width();
  auto ty = std::make_shared<AxisTaps>(make_taps(h, target_h));
  auto tx = std::make_shared<AxisTaps>(make_taps(w, target_w));
  const Tensor& in = x.value();
  Tensor out = Tensor::chw(c_n, target_h, target_w);
  for (int c = 0; c < c_n; ++c) {
    for (int oy = 0; oy < target_h; ++oy) {
      const int y0 = ty->lo[oy], y1 = ty->hi[oy];
      const double ly = ty->frac[oy];
      for (int ox = 0; ox < target_w; ++ox) {
        const int x0 = tx->lo[ox], x1 = tx->hi[ox];
        const double lx = tx->frac[ox];
        out(c, oy, ox) = (1.0 - ly) * ((1.0 - lx) * in(c, y0, x0) + lx * in(c, y0, x1)) +
                         ly * ((1.0 - lx) * in(c, y1, x0) + lx * in(c, y1, x1));
      }
    }
  }
  return Var::make(std::move(out), {x}, [px = x.node(), ty, tx](detail::Node& self) {
    Tensor& g = px->grad_buffer();
    const int c_n = self.grad.channels(), oh = self.grad.height(), ow = self.grad.width();
    for (int c = 0; c < c_n; ++c) {
      for (int oy = 0; oy < oh; ++oy) {
        const int y0 = ty->lo[oy], y1 = ty->hi[oy];
        const double ly = ty->frac[oy];
        for (int ox = 0; ox < ow; ++ox) {
          const int x0 = tx->lo[ox], x1 = tx->hi[ox];
          const double lx = tx->frac[ox];
          const double go = self.grad(c, oy, ox);
          g(c, y0, x0) += go * (1.0 - ly) * (1.0 - lx);
          g(c, y0, x1) += go * (1.0 - ly) * lx;
          g(c, y1, x0) += go * ly * (1.0 - lx);
          g(c, y1, x1) += go * ly * lx;
        }
      }
    }
  });
}

Var upsample_flow_x2(const Var& flow) {
  require_rank3(flow, "upsample_flow_x2");
  if (flow.channels() != 2) throw InvalidArgument("upsample_flow_x2: flow must have 2 channels");
  return scale(resize_bilinear(flow, 2 * flow.height(), 2 * flow.width()), 2.0);
}

Var resize_flow(const Var& flow, int target_h, int target_w) {
  require_rank3(flow, "resize_flow");
  if (flow.channels() != 2) throw InvalidArgument("resize_flow: flow must have 2 channels");
  if (target_h == flow.height() && target_w == flow.width()) return flow;
  if (target_h == 2 * flow.height() && target_w == 2 * flow.width()) return upsample_flow_x2(flow);
  const double sx = static_cast<double>(target_w) / flow.width();
  const double sy = static_cast<double>(target_h) / flow.height();
  return scale_channels(resize_bilinear(flow, target_h, target_w), {sx, sy});
}

Var channel_adapter(const Var& feature, int target_channels, ParamBinding& binding,
                    const ParameterSet& params) {
  require_rank3(feature, "channel_adapter");
  if (target_channels < 1) throw InvalidArgument("channel_adapter: target channels must be >= 1");
  const Var& w = binding.get(params, "weight");
  const Var& b = binding.get(params, "bias");
  const std::vector<int> expected{target_channels, feature.channels(), 1, 1};
  if (w.value().shape() != expected || b.value().shape() != std::vector<int>{target_channels}) {
    throw InvalidArgument("channel_adapter: parameter shapes " + shape_string(w.value().shape()) +
                          " do not match expected " + shape_string(expected));
  }
  return conv2d(feature, w, b, 1, 0);
}

Tensor area_downsample(const Tensor& x, int factor) {
  if (x.rank() != 3) throw InvalidArgument("area_downsample: expected a (C,H,W) tensor");
  if (factor < 1) throw InvalidArgument("area_downsample: factor must be >= 1");
  if (factor == 1) return x;
  const int h = x.height(), w = x.width();
  const int oh = (h + factor - 1) / factor, ow = (w + factor - 1) / factor;
  Tensor out = Tensor::chw(x.channels(), oh, ow);
  for (int c = 0; c < x.channels(); ++c) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        int n = 0;
        for (int y = oy * factor; y < std::min(h, (oy + 1) * factor); ++y)
          for (int xx = ox * factor; xx < std::min(w, (ox + 1) * factor); ++xx, ++n) acc += x(c, y, xx);
        out(c, oy, ox) = acc / n;
      }
    }
  }
  return out;
}

}  // namespace irr::core
