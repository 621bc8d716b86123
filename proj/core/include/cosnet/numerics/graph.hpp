#pragma once

#include <concepts>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cosnet/numerics/tensor.hpp"

namespace cosnet {

template <std::floating_point T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

template <std::floating_point T>
class Graph;

/// Handle to a node in a compute record.
template <std::floating_point T>
class Var {
 public:
  Var() = default;
  Var(Graph<T>* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph<T>& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Graph<T>* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run compute record. Nodes are appended in evaluation order, so
/// every node's inputs precede it and reverse index order is a valid
/// reverse topological order.
///
/// One record belongs to one forward/backward pass. Parameters referenced
/// through param() are read during the forward pass and only written by
/// accumulate_parameter_grads().
template <std::floating_point T>
class Graph {
 public:
  /// Propagates the gradient of node `self` into its inputs.
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> constant(Tensor<T> value);
  Var<T> variable(Tensor<T> value);
  /// Leaf bound to a parameter; repeated calls return the same node.
  Var<T> param(Parameter<T>& p);

  /// Appends an operation node. `backward` may be empty for operations
  /// whose inputs never need gradients; it is dropped automatically when
  /// no input requires one.
  Var<T> record(Tensor<T> value, std::vector<std::size_t> inputs, std::string_view op,
                BackwardFn backward);

  const Tensor<T>& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::string_view op(std::size_t id) const { return nodes_[id].op; }
  const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Gradient buffer of a node, zero-initialised on first access.
  Tensor<T>& grad(std::size_t id);
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

  /// Reverse-mode accumulation from a one-element loss node.
  void backward(Var<T> loss);

  /// Gradients of every requires-grad leaf, keyed by node id.
  std::map<std::size_t, Tensor<T>> leaf_gradients() const;

  /// Adds leaf gradients of bound parameters into Parameter::grad.
  void accumulate_parameter_grads() const;

  const std::vector<std::pair<Parameter<T>*, std::size_t>>& bound_parameters() const {
    return params_;
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    std::string_view op;
    bool requires_grad = false;
    bool leaf = false;
  };

  Var<T> push_leaf(Tensor<T> value, bool requires_grad, std::string_view op);

  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter<T>*, std::size_t>> params_;
  std::unordered_map<const Parameter<T>*, std::size_t> param_nodes_;
};

template <std::floating_point T>
const Tensor<T>& Var<T>::value() const {
  return graph_->value(id_);
}

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace cosnet
