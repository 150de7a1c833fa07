#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace srw {

using Vector = std::vector<double>;

/// Dense row-major square matrix; only what covariance bookkeeping needs.
class Matrix {
public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static Matrix identity(std::size_t n, double scale = 1.0) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
    return m;
  }

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  Matrix scaled(double s) const {
    Matrix r = *this;
    for (double& x : r.data_) x *= s;
    return r;
  }

  /// a^T M a
  double quadratic_form(std::span<const double> a) const {
    if (a.size() != n_) throw std::invalid_argument("quadratic_form: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) acc += a[i] * (*this)(i, j) * a[j];
    return acc;
  }

  bool is_symmetric(double tol = 0.0) const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double d = (*this)(i, j) - (*this)(j, i);
        if (d > tol || -d > tol) return false;
      }
    return true;
  }

  const std::vector<double>& data() const { return data_; }

private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

}  // namespace srw
