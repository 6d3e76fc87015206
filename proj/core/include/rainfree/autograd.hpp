#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rainfree/tensor.hpp"

// Tape-free reverse-mode differentiation over Tensors. Every operation result keeps
// shared ownership of its inputs; backward() walks the graph in reverse topological
// order from a scalar root.
namespace rainfree::ag {

struct Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Tensor value;
  Tensor grad;  // empty until something flows in
  bool requires_grad = false;
  std::vector<NodePtr> inputs;
  BackwardFn backward;

  // Zero-initialized gradient buffer shaped like value.
  Tensor& grad_buffer();
  void accumulate(const Tensor& g);
};

class Var {
 public:
  Var() = default;
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  [[nodiscard]] const Tensor& value() const { return node_->value; }
  [[nodiscard]] const Tensor& grad() const { return node_->grad; }
  [[nodiscard]] bool requires_grad() const { return node_ && node_->requires_grad; }
  [[nodiscard]] const Shape& shape() const { return node_->value.shape(); }
  [[nodiscard]] const NodePtr& node() const { return node_; }
  [[nodiscard]] bool defined() const { return static_cast<bool>(node_); }

  // Leaves only: flip participation in differentiation.
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  void zero_grad() { node_->grad = Tensor(); }
  Tensor& mutable_value() { return node_->value; }

 private:
  NodePtr node_;
};

Var constant(Tensor value);
Var parameter(Tensor value);
// Same value, no history.
Var detach(const Var& v);

// Builds a result node. `fn` is only attached when some input requires grad.
Var make_result(Tensor value, std::vector<Var> inputs, BackwardFn fn);

// Seeds d(root)/d(root) = 1 and propagates. Root must hold a single element.
void backward(const Var& root);

// A named trainable tensor.
struct Parameter {
  std::string name;
  Var var;
};

}  // namespace rainfree::ag
