#include "fairhil/data_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_set>

#include "fairhil/error.hpp"

namespace fairhil {

std::string_view to_string(ColumnKind kind) noexcept {
  return kind == ColumnKind::kNumeric ? "numeric" : "categorical";
}

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  // from_chars rejects a leading '+', accept it here.
  if (text.front() == '+') {
    text.remove_prefix(1);
    if (text.empty() || text.front() == '-') return std::nullopt;
  }
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error(ErrorCode::kInternal, "number formatting failed");
  return std::string(buf, ptr);
}

void sort_levels(std::vector<std::string>& levels) {
  const bool all_numeric = std::all_of(levels.begin(), levels.end(),
                                       [](const std::string& s) { return parse_number(s).has_value(); });
  if (all_numeric) {
    std::stable_sort(levels.begin(), levels.end(), [](const std::string& a, const std::string& b) {
      const double x = *parse_number(a);
      const double y = *parse_number(b);
      if (x != y) return x < y;
      return a < b;
    });
  } else {
    std::sort(levels.begin(), levels.end());
  }
}

// ---------------------------------------------------------------------------
// Column

Column Column::numeric(std::string name, std::vector<double> values) {
  auto data = std::make_shared<Data>();
  for (double& v : values) {
    if (!std::isfinite(v)) v = std::numeric_limits<double>::quiet_NaN();
  }
  data->numbers = std::move(values);
  return Column(std::move(name), ColumnKind::kNumeric, std::move(data));
}

Column Column::categorical(std::string name, std::vector<std::string> levels, std::vector<int> codes) {
  const int n_levels = static_cast<int>(levels.size());
  for (int c : codes) {
    if (c != kMissingCode && (c < 0 || c >= n_levels)) {
      throw Error(ErrorCode::kInternal, "category code out of range in column '" + name + "'");
    }
  }
  auto data = std::make_shared<Data>();
  data->levels = std::move(levels);
  data->codes = std::move(codes);
  return Column(std::move(name), ColumnKind::kCategorical, std::move(data));
}

Column Column::from_labels(std::string name, std::span<const std::optional<std::string>> labels) {
  std::vector<std::string> levels;
  {
    std::unordered_set<std::string> seen;
    for (const auto& l : labels) {
      if (l && seen.insert(*l).second) levels.push_back(*l);
    }
  }
  sort_levels(levels);
  std::map<std::string, int, std::less<>> index;
  for (std::size_t i = 0; i < levels.size(); ++i) index.emplace(levels[i], static_cast<int>(i));
  std::vector<int> codes;
  codes.reserve(labels.size());
  for (const auto& l : labels) codes.push_back(l ? index.find(*l)->second : kMissingCode);
  return categorical(std::move(name), std::move(levels), std::move(codes));
}

std::size_t Column::size() const noexcept {
  return is_numeric() ? data_->numbers.size() : data_->codes.size();
}

bool Column::is_missing(std::size_t row) const {
  return is_numeric() ? std::isnan(data_->numbers[row]) : data_->codes[row] == kMissingCode;
}

const std::string& Column::label(std::size_t row) const {
  return data_->levels.at(static_cast<std::size_t>(data_->codes[row]));
}

std::optional<int> Column::code_of(std::string_view level) const {
  const auto& lv = data_->levels;
  auto it = std::find(lv.begin(), lv.end(), level);
  if (it == lv.end()) return std::nullopt;
  return static_cast<int>(it - lv.begin());
}

std::string Column::cell_text(std::size_t row) const {
  if (is_missing(row)) return {};
  return is_numeric() ? format_number(number(row)) : label(row);
}

std::size_t Column::missing_count() const {
  std::size_t missing = 0;
  for (std::size_t r = 0; r < size(); ++r) missing += is_missing(r) ? 1 : 0;
  return missing;
}

ColumnSchema Column::schema() const {
  ColumnSchema s;
  s.name = name_;
  s.kind = kind_;
  s.missing_count = missing_count();
  if (is_numeric()) {
    for (double v : data_->numbers) {
      if (std::isnan(v)) continue;
      if (std::isnan(s.min) || v < s.min) s.min = v;
      if (std::isnan(s.max) || v > s.max) s.max = v;
    }
  } else {
    s.distinct_values = data_->levels;
  }
  return s;
}

Column Column::derived(std::string source_text) const {
  Column copy = *this;
  copy.derived_from_ = std::move(source_text);
  return copy;
}

// ---------------------------------------------------------------------------
// DataTable

std::string join_names(const std::vector<std::string>& names, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += sep;
    out += names[i];
  }
  return out;
}

DataTable::DataTable(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw Error(ErrorCode::kEmptyDataset, "table has no columns");
  rows_ = columns_.front().size();
  std::unordered_set<std::string> names;
  for (const auto& c : columns_) {
    if (!names.insert(c.name()).second) {
      throw Error(ErrorCode::kSchema, "duplicate column name '" + c.name() + "'");
    }
    if (c.size() != rows_) {
      throw Error(ErrorCode::kStructural, "column '" + c.name() + "' has " + std::to_string(c.size()) +
                                              " rows, expected " + std::to_string(rows_));
    }
  }
  if (rows_ == 0) throw Error(ErrorCode::kEmptyDataset, "table has no rows");
}

std::optional<std::size_t> DataTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name() == name) return i;
  }
  return std::nullopt;
}

const Column& DataTable::column(std::string_view name) const {
  if (auto i = find(name)) return columns_[*i];
  throw Error(ErrorCode::kValidation, "unknown column '" + std::string(name) + "'",
              "available columns: " + join_names(column_names()));
}

std::vector<std::string> DataTable::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name());
  return out;
}

std::vector<ColumnSchema> DataTable::schema() const {
  std::vector<ColumnSchema> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.schema());
  return out;
}

DataTable DataTable::with_target(std::string target, std::string positive_label) const {
  const Column& col = column(target);
  if (col.is_numeric()) {
    throw Error(ErrorCode::kValidation, "target '" + target + "' must be categorical with exactly 2 values");
  }
  if (col.levels().size() != 2) {
    throw Error(ErrorCode::kValidation,
                "target '" + target + "' must have exactly 2 distinct values, found " +
                    std::to_string(col.levels().size()),
                "values: " + join_names(col.levels()));
  }
  if (col.missing_count() > 0) {
    throw Error(ErrorCode::kValidation, "target '" + target + "' has missing values");
  }
  if (!col.code_of(positive_label)) {
    throw Error(ErrorCode::kValidation, "positive label '" + positive_label + "' is not a value of '" + target + "'",
                "values: " + join_names(col.levels()));
  }
  DataTable copy = *this;
  const auto& lv = col.levels();
  std::string negative = lv[0] == positive_label ? lv[1] : lv[0];
  copy.target_ = Target{std::move(target), std::move(positive_label), std::move(negative)};
  return copy;
}

DataTable DataTable::with_column(Column column) const {
  std::vector<Column> cols = columns_;
  cols.push_back(std::move(column));
  DataTable out(std::move(cols));
  out.target_ = target_;
  return out;
}

const std::string& DataTable::target() const {
  if (!target_) throw Error(ErrorCode::kState, "no target designated");
  return target_->name;
}

const std::string& DataTable::positive_label() const {
  if (!target_) throw Error(ErrorCode::kState, "no target designated");
  return target_->positive;
}

const std::string& DataTable::negative_label() const {
  if (!target_) throw Error(ErrorCode::kState, "no target designated");
  return target_->negative;
}

std::vector<std::string> DataTable::features() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) {
    if (!target_ || c.name() != target_->name) out.push_back(c.name());
  }
  return out;
}

Outcomes DataTable::outcomes() const {
  const Column& col = column(target());
  const int positive = *col.code_of(positive_label());
  Outcomes out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    out[r] = col.is_missing(r) ? kUnknownOutcome : static_cast<std::int8_t>(col.code(r) == positive ? 1 : 0);
  }
  return out;
}

std::size_t DataTable::positive_count() const {
  const Outcomes o = outcomes();
  return static_cast<std::size_t>(std::count(o.begin(), o.end(), std::int8_t{1}));
}

}  // namespace fairhil
