#include "cosnet/numerics/graph.hpp"

#include <string>

namespace cosnet {

template <std::floating_point T>
Var<T> Graph<T>::push_leaf(Tensor<T> value, bool requires_grad, std::string_view op) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.leaf = true;
  node.op = op;
  nodes_.push_back(std::move(node));
  return Var<T>(this, nodes_.size() - 1);
}

template <std::floating_point T>
Var<T> Graph<T>::constant(Tensor<T> value) {
  return push_leaf(std::move(value), false, "constant");
}

template <std::floating_point T>
Var<T> Graph<T>::variable(Tensor<T> value) {
  return push_leaf(std::move(value), true, "variable");
}

template <std::floating_point T>
Var<T> Graph<T>::param(Parameter<T>& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var<T>(this, it->second);
  }
  Var<T> v = push_leaf(p.value, true, "parameter");
  param_nodes_.emplace(&p, v.id());
  params_.emplace_back(&p, v.id());
  return v;
}

template <std::floating_point T>
Var<T> Graph<T>::record(Tensor<T> value, std::vector<std::size_t> inputs, std::string_view op,
                        BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.op = op;
  for (auto id : inputs) {
    if (id >= nodes_.size()) {
      throw ContractError("operation '" + std::string(op) + "' references a node not yet recorded");
    }
    node.requires_grad = node.requires_grad || nodes_[id].requires_grad;
  }
  node.inputs = std::move(inputs);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var<T>(this, nodes_.size() - 1);
}

template <std::floating_point T>
Tensor<T>& Graph<T>::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <std::floating_point T>
void Graph<T>::backward(Var<T> loss) {
  if (loss.value().size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_to_string(loss.shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor<T>();
  grad(loss.id())[0] = T(1);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.leaf || n.grad.empty() || !n.backward) continue;
    n.backward(*this, i);
  }
}

template <std::floating_point T>
std::map<std::size_t, Tensor<T>> Graph<T>::leaf_gradients() const {
  std::map<std::size_t, Tensor<T>> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (!n.leaf || !n.requires_grad) continue;
    out.emplace(i, n.grad.empty() ? Tensor<T>(n.value.shape()) : n.grad);
  }
  return out;
}

template <std::floating_point T>
void Graph<T>::accumulate_parameter_grads() const {
  for (const auto& [p, id] : params_) {
    const Node& n = nodes_[id];
    if (n.grad.empty()) continue;
    if (p->grad.shape() != p->value.shape()) p->grad = Tensor<T>(p->value.shape());
    auto dst = p->grad.values();
    auto src = n.grad.values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace cosnet
