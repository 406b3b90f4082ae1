#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairhil {

enum class ColumnKind { kNumeric, kCategorical };

std::string_view to_string(ColumnKind kind) noexcept;

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<std::string> distinct_values;  // categorical only
  double min = std::numeric_limits<double>::quiet_NaN();  // numeric only
  double max = std::numeric_limits<double>::quiet_NaN();
  std::size_t missing_count = 0;
};

inline constexpr int kMissingCode = -1;

// Per-row binary outcome: 1 positive, 0 negative, -1 unknown/excluded.
using Outcomes = std::vector<std::int8_t>;
inline constexpr std::int8_t kUnknownOutcome = -1;

// Parses a plain decimal number (optional sign, fraction, exponent).
// Leading/trailing blanks are ignored; anything else fails.
std::optional<double> parse_number(std::string_view text);

// Shortest text that parses back to exactly `value`.
std::string format_number(double value);

// Sorts category labels numerically when every label is a number, otherwise
// lexicographically. All level orderings in the library go through this.
void sort_levels(std::vector<std::string>& levels);

// One typed column. Numeric cells use NaN as the missing marker; categorical
// cells store an index into levels() or kMissingCode. Copies share storage.
class Column {
 public:
  static Column numeric(std::string name, std::vector<double> values);
  static Column categorical(std::string name, std::vector<std::string> levels,
                            std::vector<int> codes);
  // Builds a categorical column from raw labels; levels are the observed
  // labels ordered by sort_levels().
  static Column from_labels(std::string name,
                            std::span<const std::optional<std::string>> labels);

  const std::string& name() const noexcept { return name_; }
  ColumnKind kind() const noexcept { return kind_; }
  bool is_numeric() const noexcept { return kind_ == ColumnKind::kNumeric; }
  std::size_t size() const noexcept;

  bool is_missing(std::size_t row) const;
  double number(std::size_t row) const { return data_->numbers[row]; }
  int code(std::size_t row) const { return data_->codes[row]; }
  const std::string& label(std::size_t row) const;
  const std::vector<std::string>& levels() const noexcept { return data_->levels; }
  std::optional<int> code_of(std::string_view level) const;

  std::span<const double> numbers() const noexcept { return data_->numbers; }
  std::span<const int> codes() const noexcept { return data_->codes; }

  // Text for CSV export and display; empty for missing.
  std::string cell_text(std::size_t row) const;

  ColumnSchema schema() const;
  std::size_t missing_count() const;

  // Source expression when the column was derived from a custom metric.
  const std::optional<std::string>& derived_from() const noexcept { return derived_from_; }
  Column derived(std::string source_text) const;

 private:
  struct Data {
    std::vector<double> numbers;
    std::vector<int> codes;
    std::vector<std::string> levels;
  };

  Column(std::string name, ColumnKind kind, std::shared_ptr<const Data> data)
      : name_(std::move(name)), kind_(kind), data_(std::move(data)) {}

  std::string name_;
  ColumnKind kind_;
  std::shared_ptr<const Data> data_;
  std::optional<std::string> derived_from_;
};

// Immutable column store of applications, optionally with a designated
// binary target column.
class DataTable {
 public:
  explicit DataTable(std::vector<Column> columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }

  const std::vector<Column>& columns() const noexcept { return columns_; }
  const Column& column(std::size_t index) const { return columns_.at(index); }
  // Throws kValidation listing the available columns when `name` is unknown.
  const Column& column(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  std::vector<std::string> column_names() const;
  std::vector<ColumnSchema> schema() const;

  DataTable with_target(std::string target, std::string positive_label) const;
  DataTable with_column(Column column) const;

  bool has_target() const noexcept { return target_.has_value(); }
  const std::string& target() const;
  const std::string& positive_label() const;
  const std::string& negative_label() const;

  // Every non-target column, in schema order.
  std::vector<std::string> features() const;
  // Recorded target outcomes (1 = positive label).
  Outcomes outcomes() const;
  std::size_t positive_count() const;

 private:
  struct Target {
    std::string name;
    std::string positive;
    std::string negative;
  };

  std::vector<Column> columns_;
  std::size_t rows_ = 0;
  std::optional<Target> target_;
};

std::string join_names(const std::vector<std::string>& names, std::string_view sep = ", ");

}  // namespace fairhil
