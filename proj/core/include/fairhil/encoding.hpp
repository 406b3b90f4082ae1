#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairhil/data_table.hpp"

namespace fairhil {

// One standardized design column: a numeric feature, or one non-reference
// level of a categorical feature (first level in sorted order is dropped).
struct EncodedColumn {
  std::string name;     // "age" or "gender=M"
  std::string feature;  // source column
  std::optional<int> level;
  double mean = 0.0;
  double scale = 0.0;  // population standard deviation; 0 marks a constant column
};

// Standardizing one-hot encoder. Parameters are fitted on a row subset and
// can then encode any row of a table with the same schema.
class Encoder {
 public:
  Encoder() = default;

  // Fits over `rows` of `table`, using only rows with no missing cell in
  // `features`. An empty `rows` means every row.
  static Encoder fit(const DataTable& table, const std::vector<std::string>& features,
                     std::span<const std::size_t> rows = {});

  std::size_t width() const noexcept { return columns_.size(); }
  const std::vector<EncodedColumn>& columns() const noexcept { return columns_; }
  const std::vector<std::string>& features() const noexcept { return features_; }

  // Raw (unstandardized) value of an encoded column for a row; nullopt when
  // the source cell is missing.
  std::optional<double> raw_value(const DataTable& table, std::size_t column, std::size_t row) const;

  // Writes the standardized encoding of `row` into `out` (size width()).
  // Missing cells are written as 0 (the column mean) and flagged in
  // `imputed` when given. Returns false if any cell was missing.
  bool encode_row(const DataTable& table, std::size_t row, std::span<double> out,
                  std::vector<bool>* imputed = nullptr) const;

 private:
  std::vector<std::string> features_;
  std::vector<EncodedColumn> columns_;
  std::vector<std::size_t> table_column_;  // per encoded column, index into the table
};

struct EncodedMatrix {
  Eigen::MatrixXd x;  // complete rows x encoded columns, standardized over those rows
  Encoder encoder;
  std::vector<std::size_t> rows;  // source row of each matrix row
  std::size_t dropped_rows = 0;

  const std::vector<EncodedColumn>& columns() const noexcept { return encoder.columns(); }
};

// Encodes `features` (every column when empty) over rows with no missing
// cell. Column order follows the table schema, levels in sorted order.
// Throws kValidation when no complete row remains.
EncodedMatrix encode(const DataTable& table, const std::vector<std::string>& features = {});

}  // namespace fairhil
