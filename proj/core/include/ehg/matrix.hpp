#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ehg {

/// Read-only row-major view; T is double or ad::Var.
template <typename T>
struct MatrixView {
  std::span<const T> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const T> row(std::size_t r) const { return data.subspan(r * cols, cols); }
};

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return std::span<double>(data).subspan(r * cols, cols); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }

  MatrixView<double> view() const { return {data, rows, cols}; }
};

}  // namespace ehg
