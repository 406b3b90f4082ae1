#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairhil/binning.hpp"
#include "fairhil/data_table.hpp"

namespace fairhil {

enum class MetricKind { kSpd, kEqualOpportunityDiff, kAverageOddsDiff, kDisparateImpact, kTheil };
enum class View { kDataset, kModel };

inline constexpr std::string_view kModelScope = "model";

std::string_view to_string(MetricKind kind) noexcept;
std::string_view to_string(View view) noexcept;
// Accepts the canonical names ("spd", "eq_opp_diff", "avg_odds_diff",
// "disparate_impact", "theil") case-insensitively. Throws kValidation.
MetricKind parse_metric_kind(std::string_view text);
View parse_view(std::string_view text);
const std::vector<MetricKind>& all_metric_kinds();

struct MetricValue {
  MetricKind kind = MetricKind::kSpd;
  std::string scope;  // feature name or "model"
  double value = 0.0;
  bool defined = false;
  View view = View::kDataset;
  std::string reason;  // why the value is undefined
};

// Privileged values (category levels or bin labels); the unprivileged group
// is the complement within the feature's domain.
struct GroupSpec {
  std::string feature;
  std::vector<std::string> privileged;
};

struct GroupMembers {
  std::vector<std::size_t> privileged;
  std::vector<std::size_t> unprivileged;
};

// Rows with a missing cell in the feature belong to neither side.
GroupMembers resolve_group(const DataTable& table, const GroupSpec& group, std::size_t k_max = kDefaultMaxBins);

// Binary feature: the value with the higher recorded acceptance rate.
// Otherwise the single highest-rate value/bin (one-vs-rest).
GroupSpec default_privileged(const DataTable& table, std::string_view feature, std::size_t k_max = kDefaultMaxBins);

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const noexcept { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels,
                          std::span<const std::size_t> members);

// Fraction of positive outcomes among members with a known outcome; nullopt
// when there are none.
std::optional<double> positive_rate(std::span<const std::int8_t> outcomes, std::span<const std::size_t> members);

MetricValue spd(std::span<const std::int8_t> outcomes, const GroupMembers& group, std::string scope,
                View view = View::kDataset);
MetricValue disparate_impact(std::span<const std::int8_t> outcomes, const GroupMembers& group, std::string scope,
                             View view = View::kDataset);
MetricValue equal_opportunity_diff(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels,
                                   const GroupMembers& group, std::string scope);
MetricValue average_odds_diff(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels,
                              const GroupMembers& group, std::string scope);
// Generalized entropy index (alpha = 1) over benefits b = yhat - y + 1,
// taken over rows where both prediction and label are known.
MetricValue theil_index(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels);

// Max minus min acceptance rate over the feature's values/bins (empty groups
// ignored). 0 for a feature with fewer than two populated groups.
double spd_range(const DataTable& table, std::string_view feature, std::span<const std::int8_t> outcomes,
                 std::size_t k_max = kDefaultMaxBins);

// Dataset view: `outcomes` are the recorded labels. Model view: `outcomes`
// are predictions on the held-out rows (unknown elsewhere) and `labels` the
// recorded labels.
struct MetricContext {
  const DataTable& table;
  View view;
  std::span<const std::int8_t> outcomes;
  std::span<const std::int8_t> labels;
  std::size_t k_max = kDefaultMaxBins;
};

std::vector<MetricValue> metric_suite(const MetricContext& context, const GroupSpec& group,
                                      std::span<const MetricKind> chosen);
std::vector<MetricValue> metric_suite(const MetricContext& context, const GroupSpec& group,
                                      std::span<const std::string> chosen);

}  // namespace fairhil
