#include "irr/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace irr::core {

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
  std::size_t n = 1;
  for (int d : shape_) {
    if (d < 1) throw InvalidArgument("tensor dimensions must be >= 1, got " + shape_string(shape_));
    n *= static_cast<std::size_t>(d);
  }
  data_.assign(n, fill);
}

int Tensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) {
    throw InvalidArgument("axis " + std::to_string(axis) + " out of range for shape " +
                          shape_string(shape_));
  }
  return shape_[axis];
}

std::span<double> Tensor::plane(int c) {
  const std::size_t n = plane_size();
  return {data_.data() + static_cast<std::size_t>(c) * n, n};
}

std::span<const double> Tensor::plane(int c) const {
  const std::size_t n = plane_size();
  return {data_.data() + static_cast<std::size_t>(c) * n, n};
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor& Tensor::operator+=(const Tensor& other) {
  require_same_shape(*this, other, "Tensor::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": shape mismatch " + shape_string(a.shape()) +
                          " vs " + shape_string(b.shape()));
  }
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace irr::core
