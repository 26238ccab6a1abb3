#pragma once

#include "irr/core/tensor.hpp"

namespace irr::core {

/// Dense displacement field in pixels; channel 0 = u (x), channel 1 = v (y).
class FlowField {
 public:
  FlowField() = default;
  FlowField(int height, int width) : uv_(Tensor::chw(2, height, width)) {}
  explicit FlowField(Tensor uv);

  int height() const { return uv_.height(); }
  int width() const { return uv_.width(); }
  bool empty() const { return uv_.empty(); }

  double& u(int y, int x) { return uv_(0, y, x); }
  double u(int y, int x) const { return uv_(0, y, x); }
  double& v(int y, int x) { return uv_(1, y, x); }
  double v(int y, int x) const { return uv_(1, y, x); }

  const Tensor& tensor() const { return uv_; }
  Tensor& tensor() { return uv_; }

  friend bool operator==(const FlowField& a, const FlowField& b) { return a.uv_ == b.uv_; }

 private:
  Tensor uv_;
};

/// Per-pixel occlusion probability in [0, 1]; 0 = visible, 1 = occluded.
/// Ground-truth maps hold only 0 and 1.
class OcclusionMap {
 public:
  OcclusionMap() = default;
  OcclusionMap(int height, int width) : data_(Tensor::chw(1, height, width)) {}
  explicit OcclusionMap(Tensor data);

  int height() const { return data_.height(); }
  int width() const { return data_.width(); }
  bool empty() const { return data_.empty(); }

  double& at(int y, int x) { return data_(0, y, x); }
  double at(int y, int x) const { return data_(0, y, x); }
  bool is_binary() const;

  const Tensor& tensor() const { return data_; }
  Tensor& tensor() { return data_; }

  friend bool operator==(const OcclusionMap& a, const OcclusionMap& b) {
    return a.data_ == b.data_;
  }

 private:
  Tensor data_;
};

/// RGB image with values in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int height, int width) : data_(Tensor::chw(3, height, width)) {}
  explicit Image(Tensor data);

  int height() const { return data_.height(); }
  int width() const { return data_.width(); }

  double& at(int c, int y, int x) { return data_(c, y, x); }
  double at(int c, int y, int x) const { return data_(c, y, x); }

  const Tensor& tensor() const { return data_; }
  Tensor& tensor() { return data_; }

  friend bool operator==(const Image& a, const Image& b) { return a.data_ == b.data_; }

 private:
  Tensor data_;
};

}  // namespace irr::core
