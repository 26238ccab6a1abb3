#include "irr/core/autodiff.hpp"

#include <unordered_set>

namespace irr::core {

Tensor Var::grad() const {
  if (!node_) throw InvalidArgument("grad() on undefined Var");
  if (node_->grad.empty()) return Tensor(node_->value.shape(), 0.0);
  return node_->grad;
}

Var Var::make(Tensor value, const std::vector<Var>& inputs,
              std::function<void(detail::Node&)> backward) {
  Var out;
  out.node_ = std::make_shared<detail::Node>();
  out.node_->value = std::move(value);
  for (const Var& in : inputs) {
    if (!in.defined()) throw InvalidArgument("Var::make: undefined input");
    if (in.requires_grad()) out.node_->requires_grad = true;
  }
  if (out.node_->requires_grad) {
    out.node_->parents.reserve(inputs.size());
    for (const Var& in : inputs) out.node_->parents.push_back(in.node_);
    out.node_->backward = std::move(backward);
  }
  return out;
}

Var Var::leaf(Tensor value, bool requires_grad) {
  Var out;
  out.node_ = std::make_shared<detail::Node>();
  out.node_->value = std::move(value);
  out.node_->requires_grad = requires_grad;
  return out;
}

void backward(const Var& root) {
  if (!root.defined()) throw InvalidArgument("backward: undefined root");
  if (root.value().size() != 1) throw InvalidArgument("backward: root must hold one element");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (inputs before outputs).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

}  // namespace irr::core
