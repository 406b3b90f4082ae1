#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fairhil/binning.hpp"
#include "fairhil/data_table.hpp"

namespace fairhil {

// Row partition of one feature: category levels, or sqrt-rule bins for
// numeric features. Rows with a missing cell map to -1.
struct Grouping {
  std::string feature;
  std::vector<std::string> labels;
  std::vector<int> group_of_row;
  std::optional<BinSpec> bins;  // numeric features only

  std::size_t size() const noexcept { return labels.size(); }
  std::optional<int> find_label(std::string_view label) const;
};

Grouping group_rows(const DataTable& table, std::string_view feature, std::size_t k_max = kDefaultMaxBins);

struct GroupStat {
  std::string label;
  std::size_t count = 0;
  std::size_t positive_count = 0;
  double acceptance_rate = 0.0;  // 0 for an empty bin
};

struct FeatureSummary {
  std::string feature;
  std::vector<GroupStat> groups;
  double overall_rate = 0.0;
};

// Acceptance per value/bin. With `outcomes` omitted the recorded target is
// used (dataset view); otherwise rows whose outcome is kUnknownOutcome are
// skipped (model view passes predictions on the held-out split).
FeatureSummary summarize_feature(const DataTable& table, std::string_view feature,
                                 std::optional<std::span<const std::int8_t>> outcomes = std::nullopt,
                                 std::size_t k_max = kDefaultMaxBins);

struct NumericRange {
  double lo;
  double hi;  // inclusive
};

// A value-or-bin label (category level or bin label) or an inclusive range.
struct Constraint {
  std::string feature;
  std::variant<std::string, NumericRange> match;
};

// Conjunction of constraints, original row order. Throws kValidation when a
// value is not in the feature's domain.
std::vector<std::size_t> filter_rows(const DataTable& table, std::span<const Constraint> constraints,
                                     std::size_t k_max = kDefaultMaxBins);

}  // namespace fairhil
