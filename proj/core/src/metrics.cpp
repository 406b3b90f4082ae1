#include "fairhil/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "fairhil/error.hpp"
#include "fairhil/summary.hpp"

namespace fairhil {

std::string_view to_string(MetricKind kind) noexcept {
  switch (kind) {
    case MetricKind::kSpd: return "spd";
    case MetricKind::kEqualOpportunityDiff: return "eq_opp_diff";
    case MetricKind::kAverageOddsDiff: return "avg_odds_diff";
    case MetricKind::kDisparateImpact: return "disparate_impact";
    case MetricKind::kTheil: return "theil";
  }
  return "spd";
}

std::string_view to_string(View view) noexcept { return view == View::kDataset ? "dataset" : "model"; }

const std::vector<MetricKind>& all_metric_kinds() {
  static const std::vector<MetricKind> kinds = {MetricKind::kSpd, MetricKind::kEqualOpportunityDiff,
                                                MetricKind::kAverageOddsDiff, MetricKind::kDisparateImpact,
                                                MetricKind::kTheil};
  return kinds;
}

MetricKind parse_metric_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (MetricKind k : all_metric_kinds()) {
    if (lower == to_string(k)) return k;
  }
  throw Error(ErrorCode::kValidation, "unknown metric kind '" + std::string(text) + "'",
              "expected one of: spd, eq_opp_diff, avg_odds_diff, disparate_impact, theil");
}

View parse_view(std::string_view text) {
  if (text == "dataset") return View::kDataset;
  if (text == "model") return View::kModel;
  throw Error(ErrorCode::kValidation, "unknown view '" + std::string(text) + "'", "expected dataset or model");
}

GroupMembers resolve_group(const DataTable& table, const GroupSpec& group, std::size_t k_max) {
  const Grouping g = group_rows(table, group.feature, k_max);
  if (group.privileged.empty()) {
    throw Error(ErrorCode::kValidation, "privileged set for '" + group.feature + "' is empty");
  }
  std::vector<char> is_priv(g.size(), 0);
  for (const auto& v : group.privileged) {
    const auto idx = g.find_label(v);
    if (!idx) {
      throw Error(ErrorCode::kValidation, "value '" + v + "' is not in the domain of '" + group.feature + "'",
                  "domain: " + join_names(g.labels));
    }
    is_priv[static_cast<std::size_t>(*idx)] = 1;
  }
  if (std::all_of(is_priv.begin(), is_priv.end(), [](char c) { return c != 0; })) {
    throw Error(ErrorCode::kValidation,
                "privileged set for '" + group.feature + "' must be a proper subset of its values");
  }
  GroupMembers m;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const int grp = g.group_of_row[r];
    if (grp < 0) continue;
    (is_priv[static_cast<std::size_t>(grp)] ? m.privileged : m.unprivileged).push_back(r);
  }
  return m;
}

GroupSpec default_privileged(const DataTable& table, std::string_view feature, std::size_t k_max) {
  const FeatureSummary s = summarize_feature(table, feature, std::nullopt, k_max);
  if (s.groups.size() < 2) {
    throw Error(ErrorCode::kValidation, "feature '" + std::string(feature) + "' has a single value; no group split");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.groups.size(); ++i) {
    // Strictly greater keeps the first of tied values.
    if (s.groups[i].count > 0 &&
        (s.groups[best].count == 0 || s.groups[i].acceptance_rate > s.groups[best].acceptance_rate)) {
      best = i;
    }
  }
  return GroupSpec{s.feature, {s.groups[best].label}};
}

ConfusionCounts confusion(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels,
                          std::span<const std::size_t> members) {
  ConfusionCounts c;
  for (std::size_t r : members) {
    const auto p = predictions[r];
    const auto y = labels[r];
    if (p == kUnknownOutcome || y == kUnknownOutcome) continue;
    if (p == 1) {
      (y == 1 ? c.tp : c.fp) += 1;
    } else {
      (y == 1 ? c.fn : c.tn) += 1;
    }
  }
  return c;
}

std::optional<double> positive_rate(std::span<const std::int8_t> outcomes, std::span<const std::size_t> members) {
  std::size_t known = 0;
  std::size_t positive = 0;
  for (std::size_t r : members) {
    if (outcomes[r] == kUnknownOutcome) continue;
    ++known;
    positive += outcomes[r] == 1 ? 1 : 0;
  }
  if (known == 0) return std::nullopt;
  return static_cast<double>(positive) / static_cast<double>(known);
}

namespace {

MetricValue undefined(MetricKind kind, std::string scope, View view, std::string reason) {
  return MetricValue{kind, std::move(scope), 0.0, false, view, std::move(reason)};
}

MetricValue defined(MetricKind kind, std::string scope, View view, double value) {
  return MetricValue{kind, std::move(scope), value, true, view, {}};
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> tpr(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }
std::optional<double> fpr(const ConfusionCounts& c) { return ratio(c.fp, c.fp + c.tn); }

}  // namespace

MetricValue spd(std::span<const std::int8_t> outcomes, const GroupMembers& group, std::string scope, View view) {
  const auto priv = positive_rate(outcomes, group.privileged);
  const auto unpriv = positive_rate(outcomes, group.unprivileged);
  if (!priv || !unpriv) return undefined(MetricKind::kSpd, std::move(scope), view, "empty group");
  return defined(MetricKind::kSpd, std::move(scope), view, *unpriv - *priv);
}

MetricValue disparate_impact(std::span<const std::int8_t> outcomes, const GroupMembers& group, std::string scope,
                             View view) {
  const auto priv = positive_rate(outcomes, group.privileged);
  const auto unpriv = positive_rate(outcomes, group.unprivileged);
  if (!priv || !unpriv) return undefined(MetricKind::kDisparateImpact, std::move(scope), view, "empty group");
  if (*priv == 0.0) {
    return undefined(MetricKind::kDisparateImpact, std::move(scope), view, "privileged positive rate is 0");
  }
  return defined(MetricKind::kDisparateImpact, std::move(scope), view, *unpriv / *priv);
}

MetricValue equal_opportunity_diff(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels,
                                   const GroupMembers& group, std::string scope) {
  const auto tpr_p = tpr(confusion(predictions, labels, group.privileged));
  const auto tpr_u = tpr(confusion(predictions, labels, group.unprivileged));
  if (!tpr_p || !tpr_u) {
    return undefined(MetricKind::kEqualOpportunityDiff, std::move(scope), View::kModel, "group without actual positives");
  }
  return defined(MetricKind::kEqualOpportunityDiff, std::move(scope), View::kModel, *tpr_u - *tpr_p);
}

MetricValue average_odds_diff(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels,
                              const GroupMembers& group, std::string scope) {
  const auto cp = confusion(predictions, labels, group.privileged);
  const auto cu = confusion(predictions, labels, group.unprivileged);
  const auto tp_p = tpr(cp), tp_u = tpr(cu), fp_p = fpr(cp), fp_u = fpr(cu);
  if (!tp_p || !tp_u || !fp_p || !fp_u) {
    return undefined(MetricKind::kAverageOddsDiff, std::move(scope), View::kModel,
                     "group without actual positives or negatives");
  }
  return defined(MetricKind::kAverageOddsDiff, std::move(scope), View::kModel,
                 0.5 * ((*fp_u - *fp_p) + (*tp_u - *tp_p)));
}

MetricValue theil_index(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels) {
  const std::size_t n = std::min(predictions.size(), labels.size());
  std::size_t count[3] = {0, 0, 0};  // benefits 0, 1, 2
  std::size_t total = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (predictions[r] == kUnknownOutcome || labels[r] == kUnknownOutcome) continue;
    ++count[predictions[r] - labels[r] + 1];
    ++total;
  }
  const std::string scope(kModelScope);
  if (total == 0) return undefined(MetricKind::kTheil, scope, View::kModel, "no rows");
  const double mu = static_cast<double>(count[1] + 2 * count[2]) / static_cast<double>(total);
  // All benefits 0 is an equal distribution: index 0.
  if (mu == 0.0) return defined(MetricKind::kTheil, scope, View::kModel, 0.0);
  double sum = 0.0;
  for (int b = 1; b <= 2; ++b) {
    const double x = b / mu;
    sum += static_cast<double>(count[b]) * x * std::log(x);
  }
  return defined(MetricKind::kTheil, scope, View::kModel, std::max(0.0, sum / static_cast<double>(total)));
}

double spd_range(const DataTable& table, std::string_view feature, std::span<const std::int8_t> outcomes,
                 std::size_t k_max) {
  const FeatureSummary s = summarize_feature(table, feature, outcomes, k_max);
  double lo = 2.0, hi = -1.0;
  for (const auto& g : s.groups) {
    if (g.count == 0) continue;
    lo = std::min(lo, g.acceptance_rate);
    hi = std::max(hi, g.acceptance_rate);
  }
  return hi >= lo ? hi - lo : 0.0;
}

std::vector<MetricValue> metric_suite(const MetricContext& ctx, const GroupSpec& group,
                                      std::span<const MetricKind> chosen) {
  const GroupMembers members = resolve_group(ctx.table, group, ctx.k_max);
  std::vector<MetricValue> out;
  out.reserve(chosen.size());
  for (MetricKind kind : chosen) {
    switch (kind) {
      case MetricKind::kSpd:
        out.push_back(spd(ctx.outcomes, members, group.feature, ctx.view));
        break;
      case MetricKind::kDisparateImpact:
        out.push_back(disparate_impact(ctx.outcomes, members, group.feature, ctx.view));
        break;
      case MetricKind::kEqualOpportunityDiff:
      case MetricKind::kAverageOddsDiff:
      case MetricKind::kTheil: {
        if (ctx.view == View::kDataset) {
          const std::string scope = kind == MetricKind::kTheil ? std::string(kModelScope) : group.feature;
          out.push_back(undefined(kind, scope, View::kDataset, "requires model view"));
          break;
        }
        if (kind == MetricKind::kEqualOpportunityDiff) {
          out.push_back(equal_opportunity_diff(ctx.outcomes, ctx.labels, members, group.feature));
        } else if (kind == MetricKind::kAverageOddsDiff) {
          out.push_back(average_odds_diff(ctx.outcomes, ctx.labels, members, group.feature));
        } else {
          out.push_back(theil_index(ctx.outcomes, ctx.labels));
        }
        break;
      }
    }
  }
  return out;
}

std::vector<MetricValue> metric_suite(const MetricContext& context, const GroupSpec& group,
                                      std::span<const std::string> chosen) {
  std::vector<MetricKind> kinds;
  kinds.reserve(chosen.size());
  for (const auto& name : chosen) kinds.push_back(parse_metric_kind(name));
  return metric_suite(context, group, kinds);
}

}  // namespace fairhil
