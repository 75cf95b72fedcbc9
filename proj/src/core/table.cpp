#include "voxflow/core/table.hpp"

#include <charconv>
#include <cmath>

#include "voxflow/core/error.hpp"

namespace voxflow {

const char *to_string(ColumnKind kind) {
  switch (kind) {
  case ColumnKind::Numeric: return "numeric";
  case ColumnKind::Categorical: return "categorical";
  case ColumnKind::Text: return "text";
  }
  return "text";
}

ColumnKind column_kind_from_string(const std::string &s) {
  if (s == "numeric") return ColumnKind::Numeric;
  if (s == "categorical") return ColumnKind::Categorical;
  if (s == "text") return ColumnKind::Text;
  fail("InvalidTable", "unknown column kind '" + s + "'");
}

std::optional<std::size_t> Table::find_column(const std::string &name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c].name == name) return c;
  return std::nullopt;
}

std::size_t Table::column_index(const std::string &name) const {
  auto c = find_column(name);
  if (!c) fail("KeyMissing", "column '" + name + "' not found");
  return *c;
}

std::vector<double> Table::numeric_column(const std::string &name) const {
  const std::size_t c = column_index(name);
  if (columns[c].kind != ColumnKind::Numeric)
    fail("SchemaMismatch", "column '" + name + "' is not numeric");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto &row : rows) {
    const auto *v = std::get_if<double>(&row[c]);
    out.push_back(v ? *v : std::nan(""));
  }
  return out;
}

void Table::validate() const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != columns.size())
      fail("RaggedRow", "row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                            " cells, expected " + std::to_string(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const Cell &cell = rows[r][c];
      if (is_missing(cell)) continue;
      if (columns[c].kind == ColumnKind::Numeric) {
        const auto *v = std::get_if<double>(&cell);
        if (!v || !std::isfinite(*v))
          fail("InvalidTable", "numeric column '" + columns[c].name + "' holds a non-finite or text cell");
      } else if (!std::holds_alternative<std::string>(cell)) {
        fail("InvalidTable", "column '" + columns[c].name + "' expects text cells");
      }
    }
  }
  if (id_column && !find_column(*id_column)) fail("InvalidTable", "id column '" + *id_column + "' missing");
}

std::string format_number(double v) {
  if (v == 0.0) return "0"; // also folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_cell(const Cell &c) {
  if (const auto *d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto *s = std::get_if<std::string>(&c)) return *s;
  return {};
}

} // namespace voxflow
