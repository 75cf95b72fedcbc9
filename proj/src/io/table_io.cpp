#include "voxflow/io/table_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "voxflow/core/error.hpp"
#include "voxflow/io/bytes.hpp"

namespace voxflow::io {

TableFormat table_format_from_string(const std::string &name) {
  if (name == "csv") return TableFormat::Csv;
  if (name == "tsv") return TableFormat::Tsv;
  if (name == "xlsx" || name == "xls" || name == "excel")
    fail("UnsupportedFormat", "Excel workbooks are not supported; export to CSV or TSV");
  fail("UnsupportedFormat", "table format '" + name + "'");
}

MergeMode merge_mode_from_string(const std::string &name) {
  if (name == "columns") return MergeMode::Columns;
  if (name == "rows") return MergeMode::Rows;
  fail("ParamSchemaViolation", "merge mode '" + name + "'");
}

namespace {

char delimiter(TableFormat f) { return f == TableFormat::Csv ? ',' : '\t'; }

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
  bool blank = false; // no characters at all, not even quotes
};

std::vector<Record> split_records(std::string_view text, char delim) {
  std::vector<Record> out;
  Record rec;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  rec.line = 1;
  auto end_record = [&] {
    rec.blank = rec.fields.empty() && !field_started;
    rec.fields.push_back(std::move(field));
    field.clear();
    out.push_back(std::move(rec));
    rec = Record{};
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delim) {
      rec.fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      end_record();
      rec.line = ++line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) fail("MalformedTable", "unterminated quoted field");
  if (field_started || !rec.fields.empty()) end_record();
  return out;
}

std::optional<double> parse_finite(const std::string &s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool needs_quotes(const std::string &s, char delim) {
  return s.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string::npos;
}

} // namespace

Table parse_table(std::string_view text, TableFormat format) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF && static_cast<unsigned char>(text[1]) == 0xBB &&
      static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);
  auto records = split_records(text, delimiter(format));
  // A lone empty trailing line is not a record.
  while (!records.empty() && records.back().blank) records.pop_back();
  if (records.empty()) fail("EmptyFile", "table has no header row");

  Table t;
  const auto &header = records.front().fields;
  for (const auto &name : header) t.columns.push_back(Column{name, ColumnKind::Numeric});
  for (std::size_t r = 1; r < records.size(); ++r)
    if (records[r].fields.size() != header.size())
      fail("RaggedRow", "line " + std::to_string(records[r].line) + " has " + std::to_string(records[r].fields.size()) +
                            " fields, header has " + std::to_string(header.size()));

  for (std::size_t c = 0; c < header.size(); ++c) {
    bool numeric = true;
    std::set<std::string> distinct;
    for (std::size_t r = 1; r < records.size(); ++r) {
      const auto &f = records[r].fields[c];
      if (f.empty()) continue;
      distinct.insert(f);
      if (numeric && !parse_finite(f)) numeric = false;
    }
    t.columns[c].kind = numeric ? ColumnKind::Numeric : (distinct.size() <= 20 ? ColumnKind::Categorical : ColumnKind::Text);
  }
  t.rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<Cell> row;
    row.reserve(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto &f = records[r].fields[c];
      if (f.empty()) {
        row.emplace_back(std::monostate{});
      } else if (t.columns[c].kind == ColumnKind::Numeric) {
        row.emplace_back(*parse_finite(f));
      } else {
        row.emplace_back(f);
      }
    }
    t.rows.push_back(std::move(row));
  }
  t.id_column = detect_id_column(t);
  return t;
}

Table read_table(const std::filesystem::path &path, TableFormat format) {
  const Bytes data = read_file(path);
  if (data.empty()) fail("EmptyFile", "'" + path.string() + "' is empty");
  return parse_table(std::string_view(reinterpret_cast<const char *>(data.data()), data.size()), format);
}

std::string format_table(const Table &t, TableFormat format) {
  const char delim = delimiter(format);
  std::string out;
  auto field = [&](const std::string &s) {
    if (needs_quotes(s, delim)) {
      out.push_back('"');
      for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
      }
      out.push_back('"');
    } else {
      out += s;
    }
  };
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) out.push_back(delim);
    field(t.columns[c].name);
  }
  out.push_back('\n');
  for (const auto &row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(delim);
      field(format_cell(row[c]));
    }
    // a bare empty line would read back as a blank line, not a missing cell
    if (row.size() == 1 && is_missing(row[0])) out += "\"\"";
    out.push_back('\n');
  }
  return out;
}

void write_table(const Table &t, const std::filesystem::path &path, TableFormat format) {
  write_file(path, format_table(t, format));
}

std::optional<std::string> detect_id_column(const Table &t) {
  static const std::set<std::string> names = {"id", "patientid", "patient_id", "patient", "subject",
                                              "subject_id", "subjectid", "case_id", "caseid"};
  for (const auto &col : t.columns) {
    std::string l = col.name;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (names.count(l)) return col.name;
  }
  return std::nullopt;
}

Table merge_tables(const Table &a, const Table &b, MergeMode mode, const std::string &key) {
  Table out;
  if (mode == MergeMode::Rows) {
    if (a.columns != b.columns) fail("SchemaMismatch", "row merge needs identical column names and kinds");
    out = a;
    out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
    return out;
  }
  const auto ka = a.find_column(key);
  const auto kb = b.find_column(key);
  if (!ka) fail("KeyMissing", "left table lacks key column '" + key + "'");
  if (!kb) fail("KeyMissing", "right table lacks key column '" + key + "'");

  out.columns = a.columns;
  std::set<std::string> used;
  for (const auto &c : a.columns) used.insert(c.name);
  std::vector<std::size_t> b_cols;
  for (std::size_t c = 0; c < b.columns.size(); ++c) {
    if (c == *kb) continue;
    Column col = b.columns[c];
    if (used.count(col.name)) col.name += "_2";
    used.insert(col.name);
    out.columns.push_back(col);
    b_cols.push_back(c);
  }
  for (const auto &ra : a.rows) {
    if (is_missing(ra[*ka])) continue;
    const std::string k = format_cell(ra[*ka]);
    for (const auto &rb : b.rows) {
      if (is_missing(rb[*kb]) || format_cell(rb[*kb]) != k) continue;
      auto row = ra;
      for (auto c : b_cols) row.push_back(rb[c]);
      out.rows.push_back(std::move(row));
    }
  }
  out.id_column = a.id_column;
  return out;
}

} // namespace voxflow::io
