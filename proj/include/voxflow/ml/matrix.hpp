#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "voxflow/core/table.hpp"

namespace voxflow::ml {

// Row-major sample x feature matrix. NaN marks a missing value.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;
  std::vector<std::string> names;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double &operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  const double *row(std::size_t r) const { return v.data() + r * cols; }

  std::vector<double> column(std::size_t c) const;
  Matrix take_rows(const std::vector<std::size_t> &idx) const;
  Matrix take_cols(const std::vector<std::size_t> &idx) const;

  friend bool operator==(const Matrix &, const Matrix &) = default;
};

// Numeric feature block of a table; throws KeyMissing / TypeMismatch.
Matrix table_matrix(const Table &t, const std::vector<std::string> &columns);
// All numeric columns except those listed.
std::vector<std::string> numeric_columns_except(const Table &t, const std::vector<std::string> &exclude);

std::vector<double> take(const std::vector<double> &y, const std::vector<std::size_t> &idx);
// Distinct values in ascending order.
std::vector<double> distinct(const std::vector<double> &y);

} // namespace voxflow::ml
