#include "fairhil/csv.hpp"

#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "fairhil/error.hpp"

namespace fairhil {
namespace {

// Splits RFC-4180 text into records. Quoted fields may contain separators,
// doubled quotes and line breaks.
std::vector<std::vector<std::string>> parse_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool after_quote = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    after_quote = false;
  };
  auto end_record = [&] {
    end_field();
    // A lone empty field is a blank line; skip it.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
    text.remove_prefix(3);
  }

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        break;
      case '"':
        if (field_started) {
          throw Error(ErrorCode::kStructural,
                      "unexpected quote inside unquoted field on line " + std::to_string(line));
        }
        in_quotes = true;
        field_started = true;
        break;
      default:
        if (after_quote) {
          throw Error(ErrorCode::kStructural,
                      "text after closing quote on line " + std::to_string(line));
        }
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kStructural, "unterminated quoted field at end of input");
  if (field_started || !record.empty()) end_record();
  return records;
}

}  // namespace

bool is_missing_marker(std::string_view cell) noexcept { return cell.empty() || cell == "NA"; }

ColumnKind infer_kind(std::span<const std::string> cells, std::string_view column_name,
                      std::size_t categorical_threshold) {
  bool any = false;
  bool all_numeric = true;
  std::unordered_set<std::string_view> distinct;
  for (const auto& cell : cells) {
    if (is_missing_marker(cell)) continue;
    any = true;
    distinct.insert(cell);
    if (all_numeric && !parse_number(cell)) all_numeric = false;
  }
  if (!any) {
    throw Error(ErrorCode::kSchema, "column '" + std::string(column_name) + "' has no non-missing values");
  }
  if (!all_numeric) return ColumnKind::kCategorical;
  // Distinct numeric values, so "1" and "1.0" count once.
  std::unordered_set<double> values;
  for (auto cell : distinct) values.insert(*parse_number(cell));
  return values.size() > categorical_threshold ? ColumnKind::kNumeric : ColumnKind::kCategorical;
}

DataTable load_csv_text(std::string_view text, const CsvOptions& options) {
  auto records = parse_records(text);
  if (records.empty()) throw Error(ErrorCode::kEmptyDataset, "CSV input is empty (no header)");

  const std::vector<std::string> header = std::move(records.front());
  {
    std::unordered_set<std::string> seen;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c].empty()) {
        throw Error(ErrorCode::kSchema, "header column " + std::to_string(c) + " has an empty name");
      }
      if (!seen.insert(header[c]).second) {
        throw Error(ErrorCode::kSchema, "duplicate header name '" + header[c] + "'");
      }
    }
  }
  const std::size_t n_rows = records.size() - 1;
  if (n_rows == 0) throw Error(ErrorCode::kEmptyDataset, "CSV has a header but no data rows");

  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw Error(ErrorCode::kStructural,
                  "row " + std::to_string(r - 1) + " has " + std::to_string(records[r].size()) +
                      " fields, header has " + std::to_string(header.size()),
                  "row_index=" + std::to_string(r - 1));
    }
  }

  std::vector<Column> columns;
  columns.reserve(header.size());
  std::vector<std::string> cells(n_rows);
  for (std::size_t c = 0; c < header.size(); ++c) {
    for (std::size_t r = 0; r < n_rows; ++r) cells[r] = std::move(records[r + 1][c]);
    const ColumnKind kind = infer_kind(cells, header[c], options.categorical_threshold);
    if (kind == ColumnKind::kNumeric) {
      std::vector<double> values(n_rows);
      for (std::size_t r = 0; r < n_rows; ++r) {
        values[r] = is_missing_marker(cells[r]) ? std::numeric_limits<double>::quiet_NaN() : *parse_number(cells[r]);
      }
      columns.push_back(Column::numeric(header[c], std::move(values)));
    } else {
      std::vector<std::optional<std::string>> labels(n_rows);
      for (std::size_t r = 0; r < n_rows; ++r) {
        if (!is_missing_marker(cells[r])) labels[r] = std::move(cells[r]);
      }
      columns.push_back(Column::from_labels(header[c], labels));
    }
  }
  return DataTable(std::move(columns));
}

DataTable load_csv(std::istream& in, const CsvOptions& options) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_csv_text(text, options);
}

DataTable load_csv_file(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open '" + path.string() + "'");
  return load_csv(in, options);
}

namespace {

void write_field(std::ostream& out, const std::string& value) {
  const bool needs_quotes = value.find_first_of(",\"\r\n") != std::string::npos ||
                            (!value.empty() && (value.front() == ' ' || value.back() == ' '));
  if (!needs_quotes) {
    out << value;
    return;
  }
  out << '"';
  for (char c : value) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void export_csv(const DataTable& table, std::ostream& out) {
  const auto& cols = table.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out << ',';
    write_field(out, cols[c].name());
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ',';
      write_field(out, cols[c].cell_text(r));
    }
    out << '\n';
  }
}

std::string to_csv(const DataTable& table) {
  std::ostringstream out;
  export_csv(table, out);
  return out.str();
}

}  // namespace fairhil
