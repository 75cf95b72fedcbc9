#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "voxflow/core/table.hpp"

namespace voxflow::io {

enum class TableFormat { Csv, Tsv };
TableFormat table_format_from_string(const std::string &name); // "csv", "tsv"; xlsx -> UnsupportedFormat

// First row is the header. Column kinds are inferred: numeric iff every
// non-empty cell parses as a finite decimal; otherwise categorical when it
// has at most 20 distinct values, else text. Empty cells are missing.
Table parse_table(std::string_view text, TableFormat format);
Table read_table(const std::filesystem::path &path, TableFormat format);

std::string format_table(const Table &t, TableFormat format);
void write_table(const Table &t, const std::filesystem::path &path, TableFormat format);

// Conventional id column names (id, patientid, patient_id, subject, ...),
// matched case-insensitively; first match wins.
std::optional<std::string> detect_id_column(const Table &t);

enum class MergeMode { Columns, Rows };
MergeMode merge_mode_from_string(const std::string &name);

// Columns: inner join on `key` (rows of `a` in order, matches of `b` in
// order); `b`'s key column is dropped and its other duplicate names get a
// "_2" suffix. Rows: concatenation, requiring equal column names and kinds.
Table merge_tables(const Table &a, const Table &b, MergeMode mode, const std::string &key);

} // namespace voxflow::io
