#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "ecgraph/tensor.hpp"

namespace ecgraph::ad {

// Reverse-mode automatic differentiation over Tensor values.
//
// Every operation allocates a Node holding the forward value; backward()
// walks the graph once in reverse topological order and accumulates
// gradients into every node that requires them. Graphs are built per
// forward pass and dropped afterwards; parameters enter as leaves.

struct Node {
  Tensor value;
  Tensor grad;       // allocated lazily by backward()
  bool requires_grad = true;
  bool grad_ready = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad, adds into parents' grads. Null for leaves.
  std::function<void(Node&)> backprop;
};

class Var {
public:
  Var() = default;

  static Var leaf(Tensor value, bool requires_grad = true) {
    Var v;
    v.node_ = std::make_shared<Node>();
    v.node_->value = std::move(value);
    v.node_->requires_grad = requires_grad;
    return v;
  }
  // A leaf that backward() will never differentiate through.
  static Var constant(Tensor value) { return leaf(std::move(value), false); }

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  const Tensor& grad() const {
    if (!node_->grad_ready) fail(Errc::ShapeMismatch, "gradient not computed for this variable");
    return node_->grad;
  }
  bool has_grad() const { return node_ && node_->grad_ready; }
  bool requires_grad() const { return node_->requires_grad; }

  std::shared_ptr<Node> node() const { return node_; }

  static Var wrap(std::shared_ptr<Node> n) {
    Var v;
    v.node_ = std::move(n);
    return v;
  }

private:
  std::shared_ptr<Node> node_;
};

// Seeds root with d(root)/d(root) = 1 and fills grads of all reachable
// nodes with requires_grad. Root must be a scalar (numel == 1).
void backward(const Var& root);

// ---- graph construction -------------------------------------------------

// [m,k] x [k,n] -> [m,n]
Var matmul(const Var& a, const Var& b);
// Elementwise; b may also be a vector of length a.cols() broadcast over rows.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
// k * a + c, elementwise constants.
Var affine(const Var& a, double k, double c);
Var sigmoid(const Var& a);
Var tanh_op(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
// Softmax along each row of a 2-D tensor.
Var softmax_rows(const Var& a);
// Row t of a 2-D tensor as a [1,cols] tensor.
Var row(const Var& a, std::size_t t);
// Stack [1,c] rows into [n,c].
Var stack_rows(const std::vector<Var>& rows);
// Concatenate two 2-D tensors with equal row counts along columns.
Var concat_cols(const Var& a, const Var& b);
Var transpose(const Var& a);
// Column-wise mean of a 2-D tensor -> [1,cols].
Var mean_rows(const Var& a);
// Sum of all entries -> scalar.
Var sum(const Var& a);
// 1-D convolution over time. x:[L,Cin], w:[Cout,Cin,K], b:[Cout] -> [L,Cout].
// Zero padding of (K-1)/2 on both sides keeps the length (K odd).
Var conv1d_same(const Var& x, const Var& w, const Var& b);
// Max pooling over time. x:[L,C] -> [floor(L/k),C]. Tail samples beyond the
// last full window are dropped.
Var maxpool_rows(const Var& x, std::size_t k);
// Per-row layer normalisation with learned gain/bias vectors of length cols.
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);
// Numerically stable cross-entropy of one logits row against an index label.
Var cross_entropy_logits(const Var& logits, std::size_t label);

} // namespace ecgraph::ad
