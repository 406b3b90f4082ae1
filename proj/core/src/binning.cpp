#include "fairhil/binning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fairhil/error.hpp"

namespace fairhil {
namespace {

std::string edge_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::size_t BinSpec::bin_of(double value) const {
  const std::size_t k = size();
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  if (it == edges.begin()) return 0;
  const auto idx = static_cast<std::size_t>(it - edges.begin()) - 1;
  return std::min(idx, k - 1);
}

std::optional<std::size_t> BinSpec::find_label(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  return std::nullopt;
}

std::size_t sqrt_bin_count(std::size_t non_missing, std::size_t k_max) {
  const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(non_missing))));
  return std::max<std::size_t>(1, std::min(k, std::max<std::size_t>(k_max, 1)));
}

BinSpec bin_values(std::string feature, std::span<const double> values, std::size_t k_max) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorCode::kValidation, "cannot bin '" + feature + "': no non-missing values");
  }

  BinSpec spec;
  spec.feature = std::move(feature);
  if (lo == hi) {
    spec.edges = {lo, hi};
    spec.labels = {edge_text(lo)};
    return spec;
  }

  std::size_t k = sqrt_bin_count(n, k_max);
  // Shrink k until the edges are strictly increasing in floating point.
  for (;; --k) {
    const double width = (hi - lo) / static_cast<double>(k);
    std::vector<double> edges(k + 1);
    for (std::size_t i = 0; i <= k; ++i) edges[i] = lo + width * static_cast<double>(i);
    edges.back() = hi;
    if (std::adjacent_find(edges.begin(), edges.end(), std::greater_equal<>()) == edges.end() || k == 1) {
      spec.edges = std::move(edges);
      break;
    }
  }
  k = spec.edges.size() - 1;
  spec.labels.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const char close = i + 1 == k ? ']' : ')';
    spec.labels.push_back("[" + edge_text(spec.edges[i]) + ", " + edge_text(spec.edges[i + 1]) + close);
  }
  // %.6g can collide for very narrow bins; fall back to full precision.
  std::vector<std::string> sorted = spec.labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    for (std::size_t i = 0; i < k; ++i) {
      const char close = i + 1 == k ? ']' : ')';
      spec.labels[i] = "[" + format_number(spec.edges[i]) + ", " + format_number(spec.edges[i + 1]) + close;
    }
  }
  return spec;
}

BinSpec bin_numeric(const DataTable& table, std::string_view feature, std::size_t k_max) {
  const Column& col = table.column(feature);
  if (!col.is_numeric()) {
    throw Error(ErrorCode::kValidation, "cannot bin categorical feature '" + std::string(feature) + "'");
  }
  return bin_values(col.name(), col.numbers(), k_max);
}

}  // namespace fairhil
