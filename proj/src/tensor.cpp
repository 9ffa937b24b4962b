#include "sgm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgm/error.hpp"

namespace sgm {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t p = 1;
  for (std::size_t s : shape) p *= s;
  return p;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DataError(std::string(op) + ": shape mismatch " + a.shape_str() +
                    " vs " + b.shape_str());
  }
}

void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw DataError(std::string(op) + ": expected rank-2 tensor, got " +
                    a.shape_str());
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_.size() > 3) {
    throw DataError("Tensor: rank " + std::to_string(shape_.size()) +
                    " exceeds 3 axes");
  }
  if (shape_product(shape_) != values_.size()) {
    throw DataError("Tensor: shape " + shape_str() + " does not match " +
                    std::to_string(values_.size()) + " values");
  }
  check_finite("Tensor constructor");
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  std::size_t n = shape_product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::identity(std::size_t n) {
  Tensor t = zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t r = rows.size();
  std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> v;
  v.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DataError("Tensor::matrix: ragged rows");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(v));
}

Tensor Tensor::row(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::column(std::vector<double> values) {
  std::size_t n = values.size();
  return Tensor({n, 1}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DataError("Tensor::rows: not a matrix: " + shape_str());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DataError("Tensor::cols: not a matrix: " + shape_str());
  return shape_[1];
}

double& Tensor::operator()(std::size_t i, std::size_t j) {
  return values_[i * shape_[1] + j];
}

double Tensor::operator()(std::size_t i, std::size_t j) const {
  return values_[i * shape_[1] + j];
}

double& Tensor::operator()(std::size_t i, std::size_t j, std::size_t k) {
  return values_[(i * shape_[1] + j) * shape_[2] + k];
}

double Tensor::operator()(std::size_t i, std::size_t j, std::size_t k) const {
  return values_[(i * shape_[1] + j) * shape_[2] + k];
}

double Tensor::item() const {
  if (!is_scalar()) {
    throw DataError("Tensor::item: tensor of shape " + shape_str() +
                    " is not scalar");
  }
  return values_[0];
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << "x";
    os << shape_[i];
  }
  os << ")";
  return os.str();
}

void Tensor::check_finite(const std::string& context) const {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw NumericError(context + ": non-finite value encountered");
    }
  }
}

// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a(i) + b(i);
  return Tensor(a.shape(), std::move(v));
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a(i) - b(i);
  return Tensor(a.shape(), std::move(v));
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a(i) * b(i);
  return Tensor(a.shape(), std::move(v));
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a(i) * c;
  return Tensor(a.shape(), std::move(v));
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor add_rowvec(const Tensor& m, const Tensor& row) {
  require_matrix(m, "add_rowvec");
  require_matrix(row, "add_rowvec");
  if (row.rows() != 1 || row.cols() != m.cols()) {
    throw DataError("add_rowvec: row " + row.shape_str() +
                    " incompatible with matrix " + m.shape_str());
  }
  Tensor out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) += row(0, j);
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DataError("matmul: inner dimensions disagree " + a.shape_str() +
                    " vs " + b.shape_str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = Tensor::zeros({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) out(i, j) += aip * b(p, j);
    }
  }
  out.check_finite("matmul");
  return out;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  Tensor out = Tensor::zeros({a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

double trace(const Tensor& a) {
  require_matrix(a, "trace");
  if (a.rows() != a.cols()) {
    throw DataError("trace: matrix not square " + a.shape_str());
  }
  double t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

Tensor sigmoid(const Tensor& a) {
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + std::exp(-a(i)));
  return Tensor(a.shape(), std::move(v));
}

Tensor tanh_t(const Tensor& a) {
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(a(i));
  return Tensor(a.shape(), std::move(v));
}

Tensor exp_t(const Tensor& a) {
  std::vector<double> v(a.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(a(i));
  Tensor out(a.shape(), std::move(v));
  out.check_finite("exp");
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  require_matrix(a, "softmax_rows");
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double mx = a(i, 0);
    for (std::size_t j = 1; j < a.cols(); ++j) mx = std::max(mx, a(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(i, j) = std::exp(a(i, j) - mx);
      denom += out(i, j);
    }
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) /= denom;
  }
  return out;
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += a(i);
  return s;
}

double mean(const Tensor& a) {
  if (a.numel() == 0) throw DataError("mean: empty tensor");
  return sum(a) / static_cast<double>(a.numel());
}

double mean_abs(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mean_abs");
  if (a.numel() == 0) throw DataError("mean_abs: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) s += std::fabs(a(i) - b(i));
  return s / static_cast<double>(a.numel());
}

double mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  if (a.numel() == 0) throw DataError("mse: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = a(i) - b(i);
    s += d * d;
  }
  return s / static_cast<double>(a.numel());
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::fabs(a(i)));
  return m;
}

// ---------------------------------------------------------------------------
// LU with partial pivoting. Factors are kept in plain vectors; the solve and
// the condition estimate share them.

namespace {

struct Lu {
  std::size_t n = 0;
  std::vector<double> lu;        // combined L (unit diagonal) and U
  std::vector<std::size_t> piv;  // row permutation
};

Lu lu_factor(const Tensor& m) {
  const std::size_t n = m.rows();
  Lu f;
  f.n = n;
  f.lu = m.data();
  f.piv.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.piv[i] = i;
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return f.lu[i * n + j];
  };
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::fabs(at(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(at(i, k)) > best) {
        best = std::fabs(at(i, k));
        p = i;
      }
    }
    if (best == 0.0) throw NumericError("linsolve: matrix is singular");
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      std::swap(f.piv[k], f.piv[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      at(i, k) /= at(k, k);
      const double l = at(i, k);
      if (l == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) at(i, j) -= l * at(k, j);
    }
  }
  return f;
}

// Solves for one column vector b (length n), in place.
void lu_solve_vec(const Lu& f, std::vector<double>& b) {
  const std::size_t n = f.n;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.piv[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu[i * n + j] * x[j];
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= f.lu[ii * n + j] * x[j];
    x[ii] /= f.lu[ii * n + ii];
  }
  b = std::move(x);
}

double norm1(const Tensor& m) {
  double best = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) col += std::fabs(m(i, j));
    best = std::max(best, col);
  }
  return best;
}

double inv_norm1(const Lu& f) {
  const std::size_t n = f.n;
  double best = 0.0;
  std::vector<double> e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    lu_solve_vec(f, e);
    double col = 0.0;
    for (double v : e) col += std::fabs(v);
    best = std::max(best, col);
  }
  return best;
}

}  // namespace

Tensor linsolve(const Tensor& m, const Tensor& rhs, double cond_limit) {
  require_matrix(m, "linsolve");
  if (m.rows() != m.cols()) {
    throw DataError("linsolve: matrix not square " + m.shape_str());
  }
  Tensor b = rhs;
  if (b.rank() == 1) b = Tensor({rhs.numel(), 1}, rhs.data());
  require_matrix(b, "linsolve");
  if (b.rows() != m.rows()) {
    throw DataError("linsolve: rhs rows " + b.shape_str() +
                    " incompatible with matrix " + m.shape_str());
  }
  Lu f = lu_factor(m);
  const double cond = norm1(m) * inv_norm1(f);
  if (!std::isfinite(cond) || cond > cond_limit) {
    throw NumericError("linsolve: matrix ill-conditioned (estimate " +
                       std::to_string(cond) + " exceeds limit)");
  }
  const std::size_t n = f.n, k = b.cols();
  Tensor x = Tensor::zeros(b.shape());
  std::vector<double> col(n);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
    lu_solve_vec(f, col);
    for (std::size_t i = 0; i < n; ++i) x(i, j) = col[i];
  }
  x.check_finite("linsolve");
  if (rhs.rank() == 1) return Tensor({rhs.numel()}, x.data());
  return x;
}

double condition_estimate_1norm(const Tensor& m) {
  Lu f = lu_factor(m);
  return norm1(m) * inv_norm1(f);
}

}  // namespace sgm
