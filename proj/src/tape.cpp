#include "sgm/tape.hpp"

#include <cmath>

#include "sgm/error.hpp"

namespace sgm {

const Tensor& Var::value() const { return tape->value_of(id); }

Var Tape::push(Tensor value, bool requires_grad,
               std::function<void(Tape&, const Tensor&)> back) {
  nodes_.push_back(Node{std::move(value), requires_grad, std::move(back)});
  return Var{this, nodes_.size() - 1};
}

void Tape::check_owned(Var v, const char* op) const {
  if (v.tape != this) {
    throw DataError(std::string(op) + ": Var does not belong to this tape");
  }
}

void Tape::accumulate(std::size_t id, const Tensor& adj) {
  if (!nodes_[id].requires_grad) return;
  Tensor& slot = adjoints_[id];
  if (slot.numel() == 0) {
    slot = adj;
  } else {
    slot = sgm::add(slot, adj);
  }
}

void Tape::clear() {
  nodes_.clear();
  adjoints_.clear();
}

Var Tape::leaf(Tensor v) { return push(std::move(v), true, nullptr); }

Var Tape::constant(Tensor v) { return push(std::move(v), false, nullptr); }

Var Tape::add(Var a, Var b) {
  check_owned(a, "add");
  check_owned(b, "add");
  Tensor out = sgm::add(a.value(), b.value());
  const std::size_t ia = a.id, ib = b.id;
  return push(std::move(out), tracked(a) || tracked(b),
              [ia, ib](Tape& t, const Tensor& adj) {
                t.accumulate(ia, adj);
                t.accumulate(ib, adj);
              });
}

Var Tape::sub(Var a, Var b) {
  check_owned(a, "sub");
  check_owned(b, "sub");
  Tensor out = sgm::sub(a.value(), b.value());
  const std::size_t ia = a.id, ib = b.id;
  return push(std::move(out), tracked(a) || tracked(b),
              [ia, ib](Tape& t, const Tensor& adj) {
                t.accumulate(ia, adj);
                t.accumulate(ib, sgm::neg(adj));
              });
}

Var Tape::mul(Var a, Var b) {
  check_owned(a, "mul");
  check_owned(b, "mul");
  Tensor out = sgm::hadamard(a.value(), b.value());
  const std::size_t ia = a.id, ib = b.id;
  return push(std::move(out), tracked(a) || tracked(b),
              [ia, ib](Tape& t, const Tensor& adj) {
                t.accumulate(ia, sgm::hadamard(adj, t.value_of(ib)));
                t.accumulate(ib, sgm::hadamard(adj, t.value_of(ia)));
              });
}

Var Tape::neg(Var a) { return scale(a, -1.0); }

Var Tape::scale(Var a, double c) {
  check_owned(a, "scale");
  Tensor out = sgm::scale(a.value(), c);
  const std::size_t ia = a.id;
  return push(std::move(out), tracked(a),
              [ia, c](Tape& t, const Tensor& adj) {
                t.accumulate(ia, sgm::scale(adj, c));
              });
}

Var Tape::add_rowvec(Var m, Var row) {
  check_owned(m, "add_rowvec");
  check_owned(row, "add_rowvec");
  Tensor out = sgm::add_rowvec(m.value(), row.value());
  const std::size_t im = m.id, ir = row.id;
  return push(std::move(out), tracked(m) || tracked(row),
              [im, ir](Tape& t, const Tensor& adj) {
                t.accumulate(im, adj);
                Tensor radj = Tensor::zeros({1, adj.cols()});
                for (std::size_t i = 0; i < adj.rows(); ++i)
                  for (std::size_t j = 0; j < adj.cols(); ++j)
                    radj(0, j) += adj(i, j);
                t.accumulate(ir, radj);
              });
}

Var Tape::matmul(Var a, Var b) {
  check_owned(a, "matmul");
  check_owned(b, "matmul");
  Tensor out = sgm::matmul(a.value(), b.value());
  const std::size_t ia = a.id, ib = b.id;
  return push(std::move(out), tracked(a) || tracked(b),
              [ia, ib](Tape& t, const Tensor& adj) {
                t.accumulate(ia, sgm::matmul(adj, sgm::transpose(t.value_of(ib))));
                t.accumulate(ib, sgm::matmul(sgm::transpose(t.value_of(ia)), adj));
              });
}

Var Tape::transpose(Var a) {
  check_owned(a, "transpose");
  Tensor out = sgm::transpose(a.value());
  const std::size_t ia = a.id;
  return push(std::move(out), tracked(a),
              [ia](Tape& t, const Tensor& adj) {
                t.accumulate(ia, sgm::transpose(adj));
              });
}

Var Tape::linsolve(Var m, Var rhs, double cond_limit) {
  check_owned(m, "linsolve");
  check_owned(rhs, "linsolve");
  Tensor x = sgm::linsolve(m.value(), rhs.value(), cond_limit);
  const std::size_t im = m.id, ir = rhs.id, ix_shape_rank = x.rank();
  Tensor x_saved = x;
  // Adjoint solve: rhs_adj = m^{-T} out_adj, m_adj = -rhs_adj x^T.
  return push(std::move(x), tracked(m) || tracked(rhs),
              [im, ir, x_saved, cond_limit, ix_shape_rank](Tape& t, const Tensor& adj) {
                Tensor adj2 = adj;
                if (adj2.rank() == 1) adj2 = Tensor({adj.numel(), 1}, adj.data());
                Tensor xs = x_saved;
                if (xs.rank() == 1) xs = Tensor({x_saved.numel(), 1}, x_saved.data());
                Tensor mt = sgm::transpose(t.value_of(im));
                Tensor rhs_adj = sgm::linsolve(mt, adj2, cond_limit);
                Tensor m_adj = sgm::neg(sgm::matmul(rhs_adj, sgm::transpose(xs)));
                t.accumulate(im, m_adj);
                if (ix_shape_rank == 1) {
                  t.accumulate(ir, Tensor({rhs_adj.numel()}, rhs_adj.data()));
                } else {
                  t.accumulate(ir, rhs_adj);
                }
              });
}

Var Tape::sigmoid(Var a) {
  check_owned(a, "sigmoid");
  Tensor out = sgm::sigmoid(a.value());
  const std::size_t ia = a.id;
  return push(std::move(out), tracked(a),
              [ia, self = nodes_.size()](Tape& t, const Tensor& adj) {
                const Tensor& s = t.value_of(self);
                std::vector<double> v(adj.numel());
                for (std::size_t i = 0; i < v.size(); ++i)
                  v[i] = adj(i) * s(i) * (1.0 - s(i));
                t.accumulate(ia, Tensor(adj.shape(), std::move(v)));
              });
}

Var Tape::tanh(Var a) {
  check_owned(a, "tanh");
  Tensor out = sgm::tanh_t(a.value());
  const std::size_t ia = a.id;
  return push(std::move(out), tracked(a),
              [ia, self = nodes_.size()](Tape& t, const Tensor& adj) {
                const Tensor& y = t.value_of(self);
                std::vector<double> v(adj.numel());
                for (std::size_t i = 0; i < v.size(); ++i)
                  v[i] = adj(i) * (1.0 - y(i) * y(i));
                t.accumulate(ia, Tensor(adj.shape(), std::move(v)));
              });
}

Var Tape::exp(Var a) {
  check_owned(a, "exp");
  Tensor out = sgm::exp_t(a.value());
  const std::size_t ia = a.id;
  return push(std::move(out), tracked(a),
              [ia, self = nodes_.size()](Tape& t, const Tensor& adj) {
                t.accumulate(ia, sgm::hadamard(adj, t.value_of(self)));
              });
}

Var Tape::softmax_rows(Var a) {
  check_owned(a, "softmax_rows");
  Tensor out = sgm::softmax_rows(a.value());
  const std::size_t ia = a.id;
  return push(std::move(out), tracked(a),
              [ia, self = nodes_.size()](Tape& t, const Tensor& adj) {
                const Tensor& s = t.value_of(self);
                Tensor in_adj = Tensor::zeros(adj.shape());
                for (std::size_t i = 0; i < adj.rows(); ++i) {
                  double dot = 0.0;
                  for (std::size_t j = 0; j < adj.cols(); ++j)
                    dot += adj(i, j) * s(i, j);
                  for (std::size_t j = 0; j < adj.cols(); ++j)
                    in_adj(i, j) = s(i, j) * (adj(i, j) - dot);
                }
                t.accumulate(ia, in_adj);
              });
}

Var Tape::trace(Var a) {
  check_owned(a, "trace");
  const Tensor& m = a.value();
  double tr = sgm::trace(m);
  const std::size_t ia = a.id, n = m.rows();
  return push(Tensor::scalar(tr), tracked(a),
              [ia, n](Tape& t, const Tensor& adj) {
                Tensor g = Tensor::zeros({n, n});
                for (std::size_t i = 0; i < n; ++i) g(i, i) = adj.item();
                t.accumulate(ia, g);
              });
}

Var Tape::sum(Var a) {
  check_owned(a, "sum");
  const std::size_t ia = a.id;
  return push(Tensor::scalar(sgm::sum(a.value())), tracked(a),
              [ia](Tape& t, const Tensor& adj) {
                const Tensor& in = t.value_of(ia);
                t.accumulate(ia, Tensor::full(in.shape(), adj.item()));
              });
}

Var Tape::mean(Var a) {
  check_owned(a, "mean");
  const std::size_t ia = a.id;
  return push(Tensor::scalar(sgm::mean(a.value())), tracked(a),
              [ia](Tape& t, const Tensor& adj) {
                const Tensor& in = t.value_of(ia);
                const double g = adj.item() / static_cast<double>(in.numel());
                t.accumulate(ia, Tensor::full(in.shape(), g));
              });
}

Var Tape::mean_abs(Var a, Var b) {
  check_owned(a, "mean_abs");
  check_owned(b, "mean_abs");
  Tensor out = Tensor::scalar(sgm::mean_abs(a.value(), b.value()));
  const std::size_t ia = a.id, ib = b.id;
  // Subgradient: sign(a - b) with sign(0) = 0.
  return push(std::move(out), tracked(a) || tracked(b),
              [ia, ib](Tape& t, const Tensor& adj) {
                const Tensor& av = t.value_of(ia);
                const Tensor& bv = t.value_of(ib);
                const double g = adj.item() / static_cast<double>(av.numel());
                std::vector<double> v(av.numel());
                for (std::size_t i = 0; i < v.size(); ++i) {
                  const double d = av(i) - bv(i);
                  v[i] = d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
                }
                Tensor ga(av.shape(), std::move(v));
                t.accumulate(ia, ga);
                t.accumulate(ib, sgm::neg(ga));
              });
}

Var Tape::mse(Var a, Var b) {
  check_owned(a, "mse");
  check_owned(b, "mse");
  Tensor out = Tensor::scalar(sgm::mse(a.value(), b.value()));
  const std::size_t ia = a.id, ib = b.id;
  return push(std::move(out), tracked(a) || tracked(b),
              [ia, ib](Tape& t, const Tensor& adj) {
                const Tensor& av = t.value_of(ia);
                const Tensor& bv = t.value_of(ib);
                const double g = 2.0 * adj.item() / static_cast<double>(av.numel());
                std::vector<double> v(av.numel());
                for (std::size_t i = 0; i < v.size(); ++i)
                  v[i] = g * (av(i) - bv(i));
                Tensor ga(av.shape(), std::move(v));
                t.accumulate(ia, ga);
                t.accumulate(ib, sgm::neg(ga));
              });
}

Var Tape::concat_cols(Var a, Var b) {
  check_owned(a, "concat_cols");
  check_owned(b, "concat_cols");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.rows() != bv.rows()) {
    throw DataError("concat_cols: incompatible shapes " + av.shape_str() +
                    " vs " + bv.shape_str());
  }
  const std::size_t n = av.rows(), ca = av.cols(), cb = bv.cols();
  Tensor out = Tensor::zeros({n, ca + cb});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < ca; ++j) out(i, j) = av(i, j);
    for (std::size_t j = 0; j < cb; ++j) out(i, ca + j) = bv(i, j);
  }
  const std::size_t ia = a.id, ib = b.id;
  return push(std::move(out), tracked(a) || tracked(b),
              [ia, ib, n, ca, cb](Tape& t, const Tensor& adj) {
                Tensor ga = Tensor::zeros({n, ca});
                Tensor gb = Tensor::zeros({n, cb});
                for (std::size_t i = 0; i < n; ++i) {
                  for (std::size_t j = 0; j < ca; ++j) ga(i, j) = adj(i, j);
                  for (std::size_t j = 0; j < cb; ++j) gb(i, j) = adj(i, ca + j);
                }
                t.accumulate(ia, ga);
                t.accumulate(ib, gb);
              });
}

std::vector<Tensor> Tape::grad(Var loss, const std::vector<Var>& leaves) {
  check_owned(loss, "grad");
  if (!loss.value().is_scalar()) {
    throw DataError("grad: loss must be scalar, got shape " +
                    loss.value().shape_str());
  }
  adjoints_.assign(nodes_.size(), Tensor());
  adjoints_[loss.id] = Tensor::scalar(1.0);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    if (adjoints_[i].numel() == 0) continue;
    if (nodes_[i].back) nodes_[i].back(*this, adjoints_[i]);
  }
  std::vector<Tensor> out;
  out.reserve(leaves.size());
  for (Var v : leaves) {
    check_owned(v, "grad");
    if (adjoints_[v.id].numel() == 0) {
      out.push_back(Tensor::zeros(v.value().shape()));
    } else {
      out.push_back(adjoints_[v.id]);
    }
  }
  return out;
}

}  // namespace sgm
