#include "fairhil/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "fairhil/error.hpp"

namespace fairhil {

double row_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kValidation, "similarity dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                            std::to_string(b.size()));
  }
  if (a.size() < 2) throw Error(ErrorCode::kValidation, "similarity needs vectors of dimension >= 2");
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::equal(a.begin(), a.end(), b.begin()) ? 1.0 : 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

SimilarityIndex::SimilarityIndex(const DataTable& table)
    : encoder_(Encoder::fit(table, model_features(table))), rows_(table.rows()) {
  const std::size_t d = encoder_.width();
  data_.resize(rows_ * d);
  imputed_.resize(rows_ * d);
  std::vector<bool> mask;
  for (std::size_t r = 0; r < rows_; ++r) {
    encoder_.encode_row(table, r, std::span<double>(data_.data() + r * d, d), &mask);
    for (std::size_t j = 0; j < d; ++j) imputed_[r * d + j] = mask[j] ? 1 : 0;
  }
}

std::span<const double> SimilarityIndex::values(std::size_t row) const {
  if (row >= rows_) throw Error(ErrorCode::kNotFound, "unknown row " + std::to_string(row));
  const std::size_t d = encoder_.width();
  return {data_.data() + row * d, d};
}

RowVector SimilarityIndex::vector(std::size_t row) const {
  const auto v = values(row);
  RowVector out;
  out.row = row;
  out.values.assign(v.begin(), v.end());
  const std::size_t d = encoder_.width();
  out.imputed.resize(d);
  for (std::size_t j = 0; j < d; ++j) out.imputed[j] = imputed_[row * d + j] != 0;
  return out;
}

double scatter_jitter(std::size_t row) noexcept {
  // splitmix64 finalizer
  std::uint64_t z = static_cast<std::uint64_t>(row) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
  return (u - 0.5) * 0.3;
}

ScatterData scatter(const SimilarityIndex& index, const DataTable& table, std::size_t selected, View view,
                    std::span<const std::optional<Prediction>> predictions) {
  if (selected >= table.rows()) throw Error(ErrorCode::kNotFound, "unknown row " + std::to_string(selected));
  if (view == View::kModel && predictions.size() != table.rows()) {
    throw Error(ErrorCode::kState, "model view scatter needs one prediction per row");
  }
  const Outcomes y = table.outcomes();
  const Column& target = table.column(table.target());
  const auto ref = index.values(selected);

  ScatterData out;
  out.selected = selected;
  out.view = view;
  out.points.reserve(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    SimilarityPoint p;
    p.row = r;
    p.similarity = row_similarity(ref, index.values(r));
    p.label = target.label(r);
    p.selected = r == selected;
    if (view == View::kDataset) {
      p.x = static_cast<double>(y[r] == 1 ? 1 : 0) + scatter_jitter(r);
    } else if (predictions[r]) {
      p.x = predictions[r]->confidence;
      p.predicted = predictions[r]->label;
    } else {
      p.x = std::numeric_limits<double>::quiet_NaN();
    }
    out.points.push_back(std::move(p));
  }
  return out;
}

PairComparison compare_pair(const DataTable& table, std::size_t a, std::size_t b) {
  for (std::size_t r : {a, b}) {
    if (r >= table.rows()) throw Error(ErrorCode::kNotFound, "unknown row " + std::to_string(r));
  }
  PairComparison out;
  out.a = a;
  out.b = b;
  for (const auto& name : table.features()) {
    const Column& col = table.column(name);
    FeatureComparison fc;
    fc.name = name;
    fc.value_a = col.cell_text(a);
    fc.value_b = col.cell_text(b);
    const bool miss_a = col.is_missing(a), miss_b = col.is_missing(b);
    if (miss_a || miss_b) {
      fc.score = miss_a && miss_b ? 1.0 : 0.0;
    } else if (col.is_numeric()) {
      const ColumnSchema s = col.schema();
      const double range = s.max - s.min;
      fc.score = range > 0.0 ? std::clamp(1.0 - std::abs(col.number(a) - col.number(b)) / range, 0.0, 1.0) : 1.0;
    } else {
      fc.score = col.code(a) == col.code(b) ? 1.0 : 0.0;
    }
    out.features.push_back(std::move(fc));
  }
  std::stable_sort(out.features.begin(), out.features.end(),
                   [](const FeatureComparison& x, const FeatureComparison& y) { return x.score < y.score; });
  return out;
}

}  // namespace fairhil
