#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace sgm {

// Dense row-major tensor of doubles with up to 3 axes. Immutable by
// convention once built (ops return new tensors); cheap to copy at desk
// scale. Constructors reject non-finite values so NaN/Inf cannot enter a
// computation silently.
class Tensor {
 public:
  Tensor() = default;  // empty, rank 0, numel 0

  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor scalar(double v);
  static Tensor identity(std::size_t n);
  // 2-D literal, e.g. Tensor::matrix({{1,2},{3,4}}).
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row(std::vector<double> values);     // shape {1, n}
  static Tensor column(std::vector<double> values);  // shape {n, 1}

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return values_.size(); }
  bool is_scalar() const { return values_.size() == 1; }

  std::size_t rows() const;  // rank-2 only
  std::size_t cols() const;

  double& operator()(std::size_t i) { return values_[i]; }
  double operator()(std::size_t i) const { return values_[i]; }
  double& operator()(std::size_t i, std::size_t j);
  double operator()(std::size_t i, std::size_t j) const;
  double& operator()(std::size_t i, std::size_t j, std::size_t k);
  double operator()(std::size_t i, std::size_t j, std::size_t k) const;

  double item() const;  // scalar only

  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_str() const;

  // Re-validates finiteness (e.g. after in-place mutation through data()).
  void check_finite(const std::string& context) const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// ---- shape-checked element ops (throw sgm::Error subtypes on mismatch) ----

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor neg(const Tensor& a);

// Adds a {1, m} row vector to every row of an {n, m} matrix.
Tensor add_rowvec(const Tensor& m, const Tensor& row);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
double trace(const Tensor& a);

Tensor sigmoid(const Tensor& a);
Tensor tanh_t(const Tensor& a);
Tensor exp_t(const Tensor& a);
Tensor softmax_rows(const Tensor& a);

double sum(const Tensor& a);
double mean(const Tensor& a);
double mean_abs(const Tensor& a, const Tensor& b);
double mse(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& a);

// Solves m * x = rhs by partially pivoted LU. Throws NumericError when the
// matrix is singular or the 1-norm condition estimate exceeds `cond_limit`.
Tensor linsolve(const Tensor& m, const Tensor& rhs, double cond_limit = 1e8);

// 1-norm condition estimate ||m||_1 * ||m^{-1}||_1 (exact inverse norm via
// n solves; fine at desk scale).
double condition_estimate_1norm(const Tensor& m);

}  // namespace sgm
