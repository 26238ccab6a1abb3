#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "irr/core/tensor.hpp"

namespace irr::core {

namespace detail {

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads `grad` of this node and accumulates into the parents' gradients.
  std::function<void(Node&)> backward;

  Tensor& grad_buffer() {
    if (grad.empty()) grad = Tensor(value.shape(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Handle to a value in a reverse-mode autodiff graph.
///
/// Vars are cheap to copy; copies share the same node. A graph lives as long
/// as some Var references its output.
class Var {
 public:
  Var() = default;

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  /// Gradient accumulated by the last backward(); zeros if never reached.
  Tensor grad() const;
  bool requires_grad() const { return node_ && node_->requires_grad; }

  const std::vector<int>& shape() const { return node_->value.shape(); }
  int channels() const { return node_->value.channels(); }
  int height() const { return node_->value.height(); }
  int width() const { return node_->value.width(); }

  detail::Node* node() const { return node_.get(); }

  /// Builds an interior node. `backward` is dropped when no input needs grad.
  static Var make(Tensor value, const std::vector<Var>& inputs,
                  std::function<void(detail::Node&)> backward);
  static Var leaf(Tensor value, bool requires_grad);

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Value with no gradient tracking.
inline Var constant(Tensor value) { return Var::leaf(std::move(value), false); }
/// Leaf that accumulates a gradient.
inline Var variable(Tensor value) { return Var::leaf(std::move(value), true); }
/// Same value, cut from the graph.
inline Var detach(const Var& v) { return constant(v.value()); }

/// Reverse-mode sweep from a single-element root, seeding d(root)/d(root) = 1.
void backward(const Var& root);

}  // namespace irr::core
