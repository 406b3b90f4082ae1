#include "fairhil/encoding.hpp"

#include <cmath>
#include <numeric>

#include "fairhil/error.hpp"

namespace fairhil {
namespace {

std::vector<std::size_t> complete_rows(const DataTable& table, const std::vector<std::size_t>& cols,
                                       std::span<const std::size_t> candidates) {
  std::vector<std::size_t> all;
  if (candidates.empty()) {
    all.resize(table.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    candidates = all;
  }
  std::vector<std::size_t> out;
  out.reserve(candidates.size());
  for (std::size_t r : candidates) {
    bool ok = true;
    for (std::size_t c : cols) ok = ok && !table.column(c).is_missing(r);
    if (ok) out.push_back(r);
  }
  return out;
}

}  // namespace

Encoder Encoder::fit(const DataTable& table, const std::vector<std::string>& features,
                     std::span<const std::size_t> rows) {
  Encoder enc;
  enc.features_ = features;
  std::vector<std::size_t> cols;
  for (const auto& f : features) {
    const auto idx = table.find(f);
    if (!idx) table.column(f);  // throws with the available names
    cols.push_back(*idx);
  }
  // Schema order regardless of the order `features` were listed in.
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  enc.features_.clear();
  for (std::size_t c : cols) enc.features_.push_back(table.column(c).name());

  for (std::size_t c : cols) {
    const Column& col = table.column(c);
    if (col.is_numeric()) {
      enc.columns_.push_back(EncodedColumn{col.name(), col.name(), std::nullopt});
      enc.table_column_.push_back(c);
    } else {
      for (std::size_t l = 1; l < col.levels().size(); ++l) {
        enc.columns_.push_back(EncodedColumn{col.name() + "=" + col.levels()[l], col.name(), static_cast<int>(l)});
        enc.table_column_.push_back(c);
      }
    }
  }

  const auto used = complete_rows(table, cols, rows);
  if (used.empty()) throw Error(ErrorCode::kValidation, "no complete rows to fit the encoding");
  const double n = static_cast<double>(used.size());
  for (std::size_t j = 0; j < enc.columns_.size(); ++j) {
    double sum = 0.0;
    for (std::size_t r : used) sum += *enc.raw_value(table, j, r);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r : used) {
      const double d = *enc.raw_value(table, j, r) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    enc.columns_[j].mean = mean;
    // Relative cutoff so rounding noise in a constant column is not blown up.
    enc.columns_[j].scale = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 0.0;
  }
  return enc;
}

std::optional<double> Encoder::raw_value(const DataTable& table, std::size_t column, std::size_t row) const {
  const Column& col = table.column(table_column_[column]);
  if (col.is_missing(row)) return std::nullopt;
  if (col.is_numeric()) return col.number(row);
  return col.code(row) == *columns_[column].level ? 1.0 : 0.0;
}

bool Encoder::encode_row(const DataTable& table, std::size_t row, std::span<double> out,
                         std::vector<bool>* imputed) const {
  if (imputed) imputed->assign(columns_.size(), false);
  bool complete = true;
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    const auto raw = raw_value(table, j, row);
    const auto& ec = columns_[j];
    if (!raw) {
      out[j] = 0.0;
      complete = false;
      if (imputed) (*imputed)[j] = true;
      continue;
    }
    out[j] = ec.scale > 0.0 ? (*raw - ec.mean) / ec.scale : 0.0;
  }
  return complete;
}

EncodedMatrix encode(const DataTable& table, const std::vector<std::string>& features) {
  const std::vector<std::string> used_features = features.empty() ? table.column_names() : features;
  std::vector<std::size_t> cols;
  for (const auto& f : used_features) {
    const auto idx = table.find(f);
    if (!idx) table.column(f);
    cols.push_back(*idx);
  }
  EncodedMatrix m;
  m.rows = complete_rows(table, cols, {});
  if (m.rows.empty()) throw Error(ErrorCode::kValidation, "no usable rows: every row has a missing cell");
  m.dropped_rows = table.rows() - m.rows.size();
  m.encoder = Encoder::fit(table, used_features, m.rows);

  m.x.resize(static_cast<Eigen::Index>(m.rows.size()), static_cast<Eigen::Index>(m.encoder.width()));
  std::vector<double> buf(m.encoder.width());
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    m.encoder.encode_row(table, m.rows[i], buf);
    for (std::size_t j = 0; j < buf.size(); ++j) m.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[j];
  }
  return m;
}

}  // namespace fairhil
