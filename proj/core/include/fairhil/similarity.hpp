#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairhil/data_table.hpp"
#include "fairhil/encoding.hpp"
#include "fairhil/metrics.hpp"
#include "fairhil/model.hpp"

namespace fairhil {

// Pearson correlation across the coordinates of two vectors. When either
// vector has zero variance: 1 if the vectors are element-wise equal, else 0.
// Throws kValidation on a dimension mismatch or dimension < 2.
double row_similarity(std::span<const double> a, std::span<const double> b);

struct RowVector {
  std::size_t row = 0;
  std::vector<double> values;
  std::vector<bool> imputed;  // missing cells, encoded as 0 (the column mean)
};

// Standardized encodings of every row over the model features, computed once.
class SimilarityIndex {
 public:
  explicit SimilarityIndex(const DataTable& table);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dimension() const noexcept { return encoder_.width(); }
  const Encoder& encoder() const noexcept { return encoder_; }
  std::span<const double> values(std::size_t row) const;
  RowVector vector(std::size_t row) const;

 private:
  Encoder encoder_;
  std::size_t rows_ = 0;
  std::vector<double> data_;
  std::vector<char> imputed_;
};

struct SimilarityPoint {
  std::size_t row = 0;
  double similarity = 0.0;
  // Dataset view: target class (1 positive, 0 negative) plus a fixed
  // per-row jitter in [-0.15, 0.15]. Model view: prediction confidence, or
  // NaN when the prediction is undefined.
  double x = 0.0;
  std::string label;                     // recorded target value
  std::optional<std::string> predicted;  // model view
  bool selected = false;
};

struct ScatterData {
  std::size_t selected = 0;
  View view = View::kDataset;
  std::vector<SimilarityPoint> points;
};

double scatter_jitter(std::size_t row) noexcept;

// One point per table row. Model view needs `predictions` (one per row).
// Throws kNotFound for an out-of-range row.
ScatterData scatter(const SimilarityIndex& index, const DataTable& table, std::size_t selected, View view,
                    std::span<const std::optional<Prediction>> predictions = {});

struct FeatureComparison {
  std::string name;
  std::string value_a;  // display text, empty when missing
  std::string value_b;
  double score = 0.0;  // in [0, 1]
};

struct PairComparison {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<FeatureComparison> features;  // ascending score, schema order on ties
};

// Numeric: 1 - |x_a - x_b| / (max - min), 1 for a constant column.
// Categorical: 1 when equal, else 0. Both missing scores 1, one missing 0.
PairComparison compare_pair(const DataTable& table, std::size_t a, std::size_t b);

}  // namespace fairhil
