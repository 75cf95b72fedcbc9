#pragma once

#include <cstddef>
#include <vector>

namespace voxflow::linalg {

// Row-major dense matrix.
struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Dense() = default;
  Dense(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Dense &, const Dense &) = default;
};

struct SymmetricEigen {
  std::vector<double> values; // descending
  Dense vectors;              // column c is the eigenvector of values[c]
};

// Cyclic Jacobi rotations with a fixed sweep order; results depend only on
// the input bits.
SymmetricEigen symmetric_eigen(const Dense &a, double tol = 1e-14, int max_sweeps = 100);

// Solves a x = b for symmetric positive-definite a by Cholesky factorisation.
// Throws SingularDesign when a pivot falls below rel_tol * max diagonal.
std::vector<double> cholesky_solve(const Dense &a, const std::vector<double> &b, double rel_tol = 1e-10);

} // namespace voxflow::linalg
