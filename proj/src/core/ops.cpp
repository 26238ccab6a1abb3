#include "irr/core/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

namespace irr::core {
namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using ConstMapRM = Eigen::Map<const MatRM>;

void require_rank3(const Var& v, const char* what) {
  if (!v.defined() || v.value().rank() != 3) {
    throw InvalidArgument(std::string(what) + ": expected a (C,H,W) tensor");
  }
}

// im2col for a single (C,H,W) input. Rows index (c, ky, kx), columns index output pixels.
void im2col(const Tensor& x, int k, int stride, int pad, int out_h, int out_w, double* cols) {
  const int c_in = x.channels(), h = x.height(), w = x.width();
  const std::size_t npix = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * npix;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          double* dst = row + static_cast<std::size_t>(oy) * out_w;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + out_w, 0.0);
            continue;
          }
          const double* src = x.data() + (static_cast<std::size_t>(c) * h + iy) * w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const double* cols, int k, int stride, int pad, int out_h, int out_w, Tensor& dx) {
  const int c_in = dx.channels(), h = dx.height(), w = dx.width();
  const std::size_t npix = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < c_in; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * npix;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          double* dst = dx.data() + (static_cast<std::size_t>(c) * h + iy) * w;
          const double* src = row + static_cast<std::size_t>(oy) * out_w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  out += b.value();
  return Var::make(std::move(out), {a, b}, [pa = a.node(), pb = b.node()](detail::Node& self) {
    if (pa->requires_grad) pa->grad_buffer() += self.grad;
    if (pb->requires_grad) pb->grad_buffer() += self.grad;
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return Var::make(std::move(out), {a, b}, [pa = a.node(), pb = b.node()](detail::Node& self) {
    if (pa->requires_grad) pa->grad_buffer() += self.grad;
    if (pb->requires_grad) {
      Tensor& g = pb->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return Var::make(std::move(out), {a, b}, [pa = a.node(), pb = b.node()](detail::Node& self) {
    if (pa->requires_grad) {
      Tensor& g = pa->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->value[i];
    }
    if (pb->requires_grad) {
      Tensor& g = pb->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa->value[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  out *= s;
  return Var::make(std::move(out), {a}, [pa = a.node(), s](detail::Node& self) {
    Tensor& g = pa->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
  });
}

Var scale_channels(const Var& a, const std::vector<double>& factors) {
  require_rank3(a, "scale_channels");
  if (static_cast<int>(factors.size()) != a.channels()) {
    throw InvalidArgument("scale_channels: factor count does not match channels");
  }
  Tensor out = a.value();
  for (int c = 0; c < out.channels(); ++c) {
    for (double& v : out.plane(c)) v *= factors[c];
  }
  return Var::make(std::move(out), {a}, [pa = a.node(), factors](detail::Node& self) {
    Tensor& g = pa->grad_buffer();
    for (int c = 0; c < g.channels(); ++c) {
      auto gp = g.plane(c);
      auto sp = self.grad.plane(c);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += factors[c] * sp[i];
    }
  });
}

Var concat_channels(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidArgument("concat_channels: no inputs");
  int total = 0;
  for (const Var& p : parts) {
    require_rank3(p, "concat_channels");
    if (p.height() != parts[0].height() || p.width() != parts[0].width()) {
      throw InvalidArgument("concat_channels: spatial size mismatch " + shape_string(p.shape()) +
                            " vs " + shape_string(parts[0].shape()));
    }
    total += p.channels();
  }
  Tensor out = Tensor::chw(total, parts[0].height(), parts[0].width());
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + offset);
    offset += p.value().size();
  }
  std::vector<detail::Node*> nodes;
  for (const Var& p : parts) nodes.push_back(p.node());
  return Var::make(std::move(out), parts, [nodes](detail::Node& self) {
    std::size_t off = 0;
    for (detail::Node* n : nodes) {
      const std::size_t len = n->value.size();
      if (n->requires_grad) {
        Tensor& g = n->grad_buffer();
        for (std::size_t i = 0; i < len; ++i) g[i] += self.grad[off + i];
      }
      off += len;
    }
  });
}

Var slice_channels(const Var& a, int begin, int count) {
  require_rank3(a, "slice_channels");
  if (begin < 0 || count < 1 || begin + count > a.channels()) {
    throw InvalidArgument("slice_channels: range out of bounds");
  }
  const std::size_t plane = a.value().plane_size();
  Tensor out = Tensor::chw(count, a.height(), a.width());
  const double* src = a.value().data() + static_cast<std::size_t>(begin) * plane;
  std::copy(src, src + out.size(), out.data());
  return Var::make(std::move(out), {a}, [pa = a.node(), begin, plane](detail::Node& self) {
    Tensor& g = pa->grad_buffer();
    double* dst = g.data() + static_cast<std::size_t>(begin) * plane;
    for (std::size_t i = 0; i < self.grad.size(); ++i) dst[i] += self.grad[i];
  });
}

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad) {
  require_rank3(x, "conv2d");
  const Tensor& wt = weight.value();
  if (wt.rank() != 4 || wt.dim(2) != wt.dim(3)) {
    throw InvalidArgument("conv2d: weight must be (out, in, k, k), got " + shape_string(wt.shape()));
  }
  const int c_out = wt.dim(0), c_in = wt.dim(1), k = wt.dim(2);
  if (c_in != x.channels()) {
    throw InvalidArgument("conv2d: input has " + std::to_string(x.channels()) +
                          " channels, weight expects " + std::to_string(c_in));
  }
  if (bias.value().rank() != 1 || bias.value().dim(0) != c_out) {
    throw InvalidArgument("conv2d: bias shape mismatch");
  }
  if (stride < 1 || pad < 0) throw InvalidArgument("conv2d: invalid stride/pad");
  const int out_h = (x.height() + 2 * pad - k) / stride + 1;
  const int out_w = (x.width() + 2 * pad - k) / stride + 1;
  if (out_h < 1 || out_w < 1) throw InvalidArgument("conv2d: input smaller than kernel");

  const int kdim = c_in * k * k;
  const int npix = out_h * out_w;
  const bool pointwise = (k == 1 && stride == 1 && pad == 0);

  auto cols = std::make_shared<AlignedBuffer>();
  const double* cols_ptr = x.value().data();
  if (!pointwise) {
    cols->resize(static_cast<std::size_t>(kdim) * npix);
    im2col(x.value(), k, stride, pad, out_h, out_w, cols->data());
    cols_ptr = cols->data();
  }

  Tensor out = Tensor::chw(c_out, out_h, out_w);
  {
    ConstMapRM w(wt.data(), c_out, kdim);
    ConstMapRM col(cols_ptr, kdim, npix);
    MapRM o(out.data(), c_out, npix);
    o.noalias() = w * col;
    for (int c = 0; c < c_out; ++c) o.row(c).array() += bias.value()[c];
  }

  return Var::make(
      std::move(out), {x, weight, bias},
      [px = x.node(), pw = weight.node(), pb = bias.node(), cols, pointwise, k, stride, pad, out_h,
       out_w, c_out, kdim, npix](detail::Node& self) {
        ConstMapRM gout(self.grad.data(), c_out, npix);
        const double* cp = pointwise ? px->value.data() : cols->data();
        ConstMapRM col(cp, kdim, npix);
        if (pw->requires_grad) {
          MapRM gw(pw->grad_buffer().data(), c_out, kdim);
          gw.noalias() += gout * col.transpose();
        }
        if (pb->requires_grad) {
          Tensor& gb = pb->grad_buffer();
          for (int c = 0; c < c_out; ++c) gb[c] += gout.row(c).sum();
        }
        if (px->requires_grad) {
          ConstMapRM w(pw->value.data(), c_out, kdim);
          if (pointwise) {
            MapRM gx(px->grad_buffer().data(), kdim, npix);
            gx.noalias() += w.transpose() * gout;
          } else {
            AlignedBuffer gcols(static_cast<std::size_t>(kdim) * npix);
            MapRM gc(gcols.data(), kdim, npix);
            gc.noalias() = w.transpose() * gout;
            col2im(gcols.data(), k, stride, pad, out_h, out_w, px->grad_buffer());
          }
        }
      });
}

Var relu(const Var& x) { return leaky_relu(x, 0.0); }

Var leaky_relu(const Var& x, double slope) {
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : slope * v;
  return Var::make(std::move(out), {x}, [px = x.node(), slope](detail::Node& self) {
    Tensor& g = px->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += px->value[i] > 0.0 ? self.grad[i] : slope * self.grad[i];
    }
  });
}

Var sigmoid(const Var& x) {
  Tensor out = x.value();
  for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
  return Var::make(std::move(out), {x}, [px = x.node()](detail::Node& self) {
    Tensor& g = px->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = self.value[i];
      g[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

Var clamp(const Var& x, double lo, double hi) {
  Tensor out = x.value();
  for (double& v : out.values()) v = std::clamp(v, lo, hi);
  return Var::make(std::move(out), {x}, [px = x.node(), lo, hi](detail::Node& self) {
    Tensor& g = px->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = px->value[i];
      if (v >= lo && v <= hi) g[i] += self.grad[i];
    }
  });
}

Var softmax_channels(const Var& x) {
  require_rank3(x, "softmax_channels");
  const int c_n = x.channels();
  const std::size_t plane = x.value().plane_size();
  Tensor out = x.value();
  for (std::size_t p = 0; p < plane; ++p) {
    double m = out[p];
    for (int c = 1; c < c_n; ++c) m = std::max(m, out[c * plane + p]);
    double z = 0.0;
    for (int c = 0; c < c_n; ++c) {
      double& v = out[c * plane + p];
      v = std::exp(v - m);
      z += v;
    }
    for (int c = 0; c < c_n; ++c) out[c * plane + p] /= z;
  }
  return Var::make(std::move(out), {x}, [px = x.node(), c_n, plane](detail::Node& self) {
    Tensor& g = px->grad_buffer();
    for (std::size_t p = 0; p < plane; ++p) {
      double dot = 0.0;
      for (int c = 0; c < c_n; ++c) dot += self.grad[c * plane + p] * self.value[c * plane + p];
      for (int c = 0; c < c_n; ++c) {
        const std::size_t i = c * plane + p;
        g[i] += self.value[i] * (self.grad[i] - dot);
      }
    }
  });
}

Var nearest_upsample_x2(const Var& x) {
  require_rank3(x, "nearest_upsample_x2");
  const int c_n = x.channels(), h = x.height(), w = x.width();
  Tensor out = Tensor::chw(c_n, 2 * h, 2 * w);
  for (int c = 0; c < c_n; ++c)
    for (int y = 0; y < 2 * h; ++y)
      for (int xx = 0; xx < 2 * w; ++xx) out(c, y, xx) = x.value()(c, y / 2, xx / 2);
  return Var::make(std::move(out), {x}, [px = x.node()](detail::Node& self) {
    Tensor& g = px->grad_buffer();
    for (int c = 0; c < self.grad.channels(); ++c)
      for (int y = 0; y < self.grad.height(); ++y)
        for (int xx = 0; xx < self.grad.width(); ++xx) g(c, y / 2, xx / 2) += self.grad(c, y, xx);
  });
}

Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return Var::make(Tensor::scalar(s), {x}, [px = x.node()](detail::Node& self) {
    const double gs = self.grad[0];
    for (double& g : px->grad_buffer().values()) g += gs;
  });
}

}  // namespace irr::core
