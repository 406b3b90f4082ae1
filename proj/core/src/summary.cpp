#include "fairhil/summary.hpp"

#include <numeric>

#include "fairhil/error.hpp"

namespace fairhil {

std::optional<int> Grouping::find_label(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

Grouping group_rows(const DataTable& table, std::string_view feature, std::size_t k_max) {
  const Column& col = table.column(feature);
  Grouping g;
  g.feature = col.name();
  g.group_of_row.assign(table.rows(), -1);
  if (col.is_numeric()) {
    BinSpec bins = bin_values(col.name(), col.numbers(), k_max);
    for (std::size_t r = 0; r < table.rows(); ++r) {
      if (!col.is_missing(r)) g.group_of_row[r] = static_cast<int>(bins.bin_of(col.number(r)));
    }
    g.labels = bins.labels;
    g.bins = std::move(bins);
  } else {
    g.labels = col.levels();
    for (std::size_t r = 0; r < table.rows(); ++r) g.group_of_row[r] = col.code(r);
  }
  return g;
}

FeatureSummary summarize_feature(const DataTable& table, std::string_view feature,
                                 std::optional<std::span<const std::int8_t>> outcomes, std::size_t k_max) {
  const Outcomes recorded = outcomes ? Outcomes{} : table.outcomes();
  std::span<const std::int8_t> out = outcomes ? *outcomes : std::span<const std::int8_t>(recorded);
  if (out.size() != table.rows()) {
    throw Error(ErrorCode::kValidation, "outcome vector has " + std::to_string(out.size()) + " entries, table has " +
                                            std::to_string(table.rows()) + " rows");
  }
  const Grouping g = group_rows(table, feature, k_max);

  FeatureSummary s;
  s.feature = g.feature;
  s.groups.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) s.groups[i].label = g.labels[i];

  std::size_t known = 0;
  std::size_t positives = 0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (out[r] == kUnknownOutcome) continue;
    ++known;
    positives += out[r] == 1 ? 1 : 0;
    const int grp = g.group_of_row[r];
    if (grp < 0) continue;
    auto& stat = s.groups[static_cast<std::size_t>(grp)];
    ++stat.count;
    stat.positive_count += out[r] == 1 ? 1 : 0;
  }
  for (auto& stat : s.groups) {
    stat.acceptance_rate = stat.count ? static_cast<double>(stat.positive_count) / static_cast<double>(stat.count) : 0.0;
  }
  s.overall_rate = known ? static_cast<double>(positives) / static_cast<double>(known) : 0.0;
  return s;
}

std::vector<std::size_t> filter_rows(const DataTable& table, std::span<const Constraint> constraints,
                                     std::size_t k_max) {
  std::vector<char> keep(table.rows(), 1);
  for (const auto& c : constraints) {
    const Column& col = table.column(c.feature);
    if (const auto* range = std::get_if<NumericRange>(&c.match)) {
      if (!col.is_numeric()) {
        throw Error(ErrorCode::kValidation, "range constraint on categorical feature '" + c.feature + "'");
      }
      for (std::size_t r = 0; r < table.rows(); ++r) {
        keep[r] = keep[r] && !col.is_missing(r) && col.number(r) >= range->lo && col.number(r) <= range->hi;
      }
      continue;
    }
    const auto& value = std::get<std::string>(c.match);
    const Grouping g = group_rows(table, c.feature, k_max);
    const auto wanted = g.find_label(value);
    if (!wanted) {
      throw Error(ErrorCode::kValidation, "value '" + value + "' is not in the domain of '" + c.feature + "'",
                  "domain: " + join_names(g.labels));
    }
    for (std::size_t r = 0; r < table.rows(); ++r) keep[r] = keep[r] && g.group_of_row[r] == *wanted;
  }
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (keep[r]) rows.push_back(r);
  }
  return rows;
}

}  // namespace fairhil
