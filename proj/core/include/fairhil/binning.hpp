#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairhil/data_table.hpp"

namespace fairhil {

inline constexpr std::size_t kDefaultMaxBins = 10;

// Equal-width bins over [min, max]. Bins are half-open [e_i, e_{i+1}) except
// the last, which is closed so the column maximum lands in it.
struct BinSpec {
  std::string feature;
  std::vector<double> edges;  // k + 1 strictly increasing values (k = 1 may be degenerate [v, v])
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return labels.size(); }
  // Index of the bin holding `value`; values outside [min, max] clamp to the
  // first/last bin.
  std::size_t bin_of(double value) const;
  std::optional<std::size_t> find_label(std::string_view label) const;
};

// Square-root rule: k = min(ceil(sqrt(n_non_missing)), k_max).
std::size_t sqrt_bin_count(std::size_t non_missing, std::size_t k_max = kDefaultMaxBins);

BinSpec bin_values(std::string feature, std::span<const double> values, std::size_t k_max = kDefaultMaxBins);
BinSpec bin_numeric(const DataTable& table, std::string_view feature, std::size_t k_max = kDefaultMaxBins);

}  // namespace fairhil
