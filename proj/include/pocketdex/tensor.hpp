#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "pocketdex/errors.hpp"

namespace pocketdex {

// Dense row-major tensor of doubles. Rank is 1 or 2 in practice; everything
// higher-rank in the model is expressed as stacked matrices.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
    data.assign(element_count(shape), 0.0);
  }
  Tensor(std::vector<size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != element_count(shape)) throw InvalidArgument("tensor shape/data mismatch");
  }

  static size_t element_count(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<size_t> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<size_t> s, double v) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor uniform(std::vector<size_t> s, double lo, double hi, std::mt19937_64& rng) {
    Tensor t(std::move(s));
    std::uniform_real_distribution<double> u(lo, hi);
    for (auto& x : t.data) x = u(rng);
    return t;
  }

  size_t size() const { return data.size(); }
  size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(size_t i, size_t j) { return data[i * cols() + j]; }
  double at(size_t i, size_t j) const { return data[i * cols() + j]; }
  double& operator[](size_t i) { return data[i]; }
  double operator[](size_t i) const { return data[i]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

// c = a * b for row-major matrices, ikj loop order.
inline void matmul_into(const Tensor& a, const Tensor& b, Tensor& c) {
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) throw InvalidArgument("matmul: inner dimensions differ");
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  for (size_t i = 0; i < m; ++i) {
    double* ci = pc + i * n;
    for (size_t j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = pa + i * k;
    for (size_t kk = 0; kk < k; ++kk) {
      const double aik = ai[kk];
      if (aik == 0.0) continue;
      const double* bk = pb + kk * n;
      for (size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
}

// c += a^T * b (used by backward passes).
inline void matmul_at_b_accum(const Tensor& a, const Tensor& b, Tensor& c) {
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  for (size_t i = 0; i < m; ++i) {
    const double* ai = pa + i * k;
    const double* bi = pb + i * n;
    for (size_t kk = 0; kk < k; ++kk) {
      const double aik = ai[kk];
      if (aik == 0.0) continue;
      double* ck = pc + kk * n;
      for (size_t j = 0; j < n; ++j) ck[j] += aik * bi[j];
    }
  }
}

// c += a * b^T.
inline void matmul_a_bt_accum(const Tensor& a, const Tensor& b, Tensor& c) {
  const size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) throw InvalidArgument("matmul_a_bt: inner dimensions differ");
  const double* pa = a.data.data();
  const double* pb = b.data.data();
  double* pc = c.data.data();
  for (size_t i = 0; i < m; ++i) {
    const double* ai = pa + i * k;
    double* ci = pc + i * n;
    for (size_t j = 0; j < n; ++j) {
      const double* bj = pb + j * k;
      double s = 0.0;
      for (size_t kk = 0; kk < k; ++kk) s += ai[kk] * bj[kk];
      ci[j] += s;
    }
  }
}

}  // namespace pocketdex
