#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <vector>

#include "gtsne/errors.hpp"

namespace gtsne {

//! Dense row-major matrix of doubles.  Rows are points, columns are
//! coordinates.  Deliberately minimal: the library only needs storage,
//! row pointers and a handful of reductions.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> v)
      : rows_(rows), cols_(cols), data_(v) {
    if (data_.size() != rows * cols)
      throw Error(errc::invalid_input, "matrix initializer size mismatch");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  double* row(std::size_t i) noexcept { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const noexcept {
    return data_.data() + i * cols_;
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::size_t size() const noexcept { return data_.size(); }

  bool all_finite() const noexcept {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void fill(double v) { data_.assign(data_.size(), v); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

//! Euclidean distance between two points of dimension d.
inline double distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double t = a[k] - b[k];
    s += t * t;
  }
  return std::sqrt(s);
}

inline double squared_distance(const double* a, const double* b,
                               std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

//! Largest pairwise distance of a point set.
inline double diameter(const Matrix& y) {
  double best = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = i + 1; j < y.rows(); ++j) {
      double r2 = squared_distance(y.row(i), y.row(j), y.cols());
      if (r2 > best) best = r2;
    }
  return std::sqrt(best);
}

//! Requires a finite, strictly positive value; used on user-facing inputs.
inline void require(bool ok, errc code, const std::string& message) {
  if (!ok) throw Error(code, message);
}

//! Short scientific formatting for diagnostics.
inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace gtsne
