#include "voxflow/ml/matrix.hpp"

#include <algorithm>

#include "voxflow/core/error.hpp"

namespace voxflow::ml {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::take_rows(const std::vector<std::size_t> &idx) const {
  Matrix out(idx.size(), cols);
  out.names = names;
  for (std::size_t r = 0; r < idx.size(); ++r) std::copy_n(row(idx[r]), cols, out.v.begin() + long(r * cols));
  return out;
}

Matrix Matrix::take_cols(const std::vector<std::size_t> &idx) const {
  Matrix out(rows, idx.size());
  for (std::size_t c : idx) out.names.push_back(c < names.size() ? names[c] : "");
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) out(r, c) = (*this)(r, idx[c]);
  return out;
}

Matrix table_matrix(const Table &t, const std::vector<std::string> &columns) {
  Matrix m(t.row_count(), columns.size());
  m.names = columns;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto col = t.numeric_column(columns[c]);
    for (std::size_t r = 0; r < col.size(); ++r) m(r, c) = col[r];
  }
  return m;
}

std::vector<std::string> numeric_columns_except(const Table &t, const std::vector<std::string> &exclude) {
  std::vector<std::string> out;
  for (const auto &c : t.columns)
    if (c.kind == ColumnKind::Numeric && std::find(exclude.begin(), exclude.end(), c.name) == exclude.end())
      out.push_back(c.name);
  return out;
}

std::vector<double> take(const std::vector<double> &y, const std::vector<std::size_t> &idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(y[i]);
  return out;
}

std::vector<double> distinct(const std::vector<double> &y) {
  std::vector<double> out = y;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

} // namespace voxflow::ml
