#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "irr/core/aligned.hpp"

namespace irr::core {

/// Thrown when an operation receives arguments that violate its preconditions
/// (shape mismatch, invalid size, out-of-range index).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major array of doubles with a small dynamic shape.
///
/// Image-like data uses rank 3 (channels, height, width). Convolution weights
/// use rank 4 (out, in, k, k) and biases rank 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);

  static Tensor chw(int channels, int height, int width, double fill = 0.0) {
    return Tensor({channels, height, width}, fill);
  }
  static Tensor scalar(double value) { return Tensor({1}, value); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rank-3 accessors.
  int channels() const { return dim(0); }
  int height() const { return dim(1); }
  int width() const { return dim(2); }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height()) * static_cast<std::size_t>(width());
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> plane(int c);
  std::span<const double> plane(int c) const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& operator()(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }
  double operator()(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  void fill(double value);
  bool all_finite() const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double s);

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::vector<int> shape_;
  AlignedBuffer data_;
};

std::string shape_string(const std::vector<int>& shape);

/// Throws InvalidArgument naming `what` unless the tensors have equal shapes.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace irr::core
