#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sgm/tensor.hpp"

namespace sgm {

class Tape;

// Handle to a node on a tape. Cheap to copy; only valid for the tape that
// produced it and until the next clear().
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  bool valid() const { return tape != nullptr; }
};

// Single-threaded reverse-mode tape. Nodes are appended in evaluation order,
// so reverse index order is a reverse topological order and the backward
// pass visits each node exactly once.
class Tape {
 public:
  Var leaf(Tensor v);      // tracked input (parameter)
  Var constant(Tensor v);  // untracked input (data, masks, noise)

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // hadamard
  Var neg(Var a);
  Var scale(Var a, double c);
  Var add_rowvec(Var m, Var row);

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var linsolve(Var m, Var rhs, double cond_limit = 1e8);

  Var sigmoid(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var softmax_rows(Var a);

  Var trace(Var a);          // scalar
  Var sum(Var a);            // scalar
  Var mean(Var a);           // scalar
  Var mean_abs(Var a, Var b);  // scalar: mean |a - b|
  Var mse(Var a, Var b);       // scalar: mean (a - b)^2

  Var concat_cols(Var a, Var b);

  // Gradient of a scalar loss w.r.t. the given leaves. Leaves that the loss
  // does not depend on get zero gradients of matching shape.
  std::vector<Tensor> grad(Var loss, const std::vector<Var>& leaves);

  // Drops all nodes but keeps allocated capacity for reuse across steps.
  void clear();
  std::size_t size() const { return nodes_.size(); }

  const Tensor& value_of(std::size_t id) const { return nodes_[id].value; }

 private:
  friend struct Var;

  struct Node {
    Tensor value;
    bool requires_grad = false;
    // Accumulates parent adjoints given this node's adjoint. Empty for
    // leaves/constants.
    std::function<void(Tape&, const Tensor&)> back;
  };

  Var push(Tensor value, bool requires_grad,
           std::function<void(Tape&, const Tensor&)> back);
  void accumulate(std::size_t id, const Tensor& adj);
  bool tracked(Var v) const { return nodes_[v.id].requires_grad; }
  void check_owned(Var v, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> adjoints_;  // scratch for the backward pass
};

}  // namespace sgm
