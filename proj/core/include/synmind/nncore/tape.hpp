#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "synmind/nncore/tensor.hpp"

namespace synmind::nn {

/// A named trainable tensor. Lives outside the tape; each forward pass binds
/// it to a fresh leaf node and backward() accumulates into `grad`.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { std::fill(grad.data(), grad.data() + grad.size(), T(0)); }
};

/// Append-only reverse-mode tape. Nodes are created in topological order, so
/// backward() is a single reverse sweep. One tape per training step.
template <typename T>
class Tape {
 public:
  using NodeId = int;
  using BackwardFn = std::function<void(Tape&)>;

  struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // empty until first touched in backward
    bool needs_grad = false;
    BackwardFn backward;
  };

  /// Leaf with no gradient flow (targets, masks, inputs).
  NodeId constant(Tensor<T> v) { return push(std::move(v), false, nullptr); }

  /// Leaf that participates in gradients but is not a Parameter.
  NodeId input(Tensor<T> v) { return push(std::move(v), true, nullptr); }

  /// Binds a Parameter for this pass; backward() adds into p.grad.
  NodeId param(Parameter<T>& p) {
    NodeId id = push(p.value, true, nullptr);
    bindings_.emplace_back(id, &p);
    return id;
  }

  NodeId push(Tensor<T> value, bool needs_grad, BackwardFn backward) {
#ifdef SYNMIND_CHECK_FINITE
    if (!value.all_finite()) {
      throw TrainingError("non-finite values produced at tape node " +
                          std::to_string(nodes_.size()));
    }
#endif
    nodes_.push_back(Node{std::move(value), Tensor<T>(), needs_grad,
                          std::move(backward)});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  /// Ops install their backward closure after the node id is known.
  void set_backward(NodeId id, BackwardFn fn) {
    nodes_[id].backward = std::move(fn);
  }

  const Tensor<T>& value(NodeId id) const { return nodes_[id].value; }
  bool needs_grad(NodeId id) const { return nodes_[id].needs_grad; }

  /// Gradient tensor of a node, allocated as zeros on first access.
  Tensor<T>& grad(NodeId id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0 && n.value.size() > 0) {
      n.grad = Tensor<T>(n.value.shape());
    }
    return n.grad;
  }

  bool grad_touched(NodeId id) const { return nodes_[id].grad.size() > 0; }

  /// Reverse sweep from a scalar loss node. Accumulates parameter gradients
  /// into their bound Parameters.
  void backward(NodeId loss) {
    if (value(loss).size() != 1) {
      throw DimensionError("backward() requires a scalar loss, got " +
                           value(loss).shape_string());
    }
    grad(loss)[0] = T(1);
    for (NodeId id = static_cast<NodeId>(nodes_.size()) - 1; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.backward && n.grad.size() > 0) n.backward(*this);
    }
    for (auto& [id, p] : bindings_) {
      if (!grad_touched(id)) continue;
      const Tensor<T>& g = nodes_[id].grad;
#ifdef SYNMIND_CHECK_FINITE
      if (!g.all_finite()) {
        throw TrainingError("non-finite gradient for parameter " + p->name);
      }
#endif
      for (std::size_t i = 0; i < g.size(); ++i) p->grad[i] += g[i];
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
  std::vector<std::pair<NodeId, Parameter<T>*>> bindings_;
};

}  // namespace synmind::nn
