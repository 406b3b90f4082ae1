#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "fairhil/data_table.hpp"

namespace fairhil {

struct CsvOptions {
  // A column whose cells all parse as numbers is numeric only when it has
  // more distinct values than this; integer codes such as risk levels stay
  // categorical.
  std::size_t categorical_threshold = 12;
};

// "" and "NA" mark a missing cell.
bool is_missing_marker(std::string_view cell) noexcept;

ColumnKind infer_kind(std::span<const std::string> cells, std::string_view column_name,
                      std::size_t categorical_threshold = 12);

// RFC-4180 reader. Header row required. Throws Error with kStructural (ragged
// row, bad quoting), kSchema (duplicate or empty header) or kEmptyDataset.
DataTable load_csv(std::istream& in, const CsvOptions& options = {});
DataTable load_csv_text(std::string_view text, const CsvOptions& options = {});
DataTable load_csv_file(const std::filesystem::path& path, const CsvOptions& options = {});

// Byte-stable writer: LF line endings, shortest round-trip numbers, quoting
// only where RFC-4180 requires it, missing cells written as empty fields.
void export_csv(const DataTable& table, std::ostream& out);
std::string to_csv(const DataTable& table);

}  // namespace fairhil
