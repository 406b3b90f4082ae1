#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fairhil/data_table.hpp"
#include "fairhil/encoding.hpp"

namespace fairhil {

struct SplitSpec {
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Stratified on the target: each class contributes round(fraction * size)
// rows to the test side. Throws kValidation when a class has fewer than 2
// rows or the fraction is outside (0, 1).
Split split(const DataTable& table, const SplitSpec& spec);

struct TrainConfig {
  double l2 = 1e-4;
  double tolerance = 1e-8;  // on the gradient's max norm
  int max_iterations = 500;
};

// Mean logistic loss + (l2/2) ||w||^2 on a design matrix; the intercept is
// the last parameter and is not penalized.
class LogisticObjective {
 public:
  LogisticObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double l2);

  double value(const Eigen::VectorXd& params) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& params) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& params) const;
  Eigen::Index parameter_count() const noexcept { return x_.cols() + 1; }

 private:
  Eigen::VectorXd logits(const Eigen::VectorXd& params) const;

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  double l2_;
};

struct LogisticFit {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  int iterations = 0;
  double final_loss = 0.0;
  bool converged = false;
};

// Damped Newton with Armijo backtracking from zero.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TrainConfig& config);

double sigmoid(double z) noexcept;

// L2-regularized logistic regression over the standardized one-hot encoding
// of the non-derived features.
struct ModelArtifact {
  Encoder encoder;
  Eigen::VectorXd weights;  // one per encoded column
  double intercept = 0.0;
  std::string positive_label;
  std::string negative_label;
  // Training metadata.
  int iterations = 0;
  double final_loss = 0.0;
  double l2 = 0.0;
  bool converged = false;
  std::size_t training_rows = 0;
};

// Model features: every non-target column that is not a derived custom metric.
std::vector<std::string> model_features(const DataTable& table);

ModelArtifact train_logistic(const DataTable& table, std::span<const std::size_t> train_rows,
                             const TrainConfig& config = {});

struct Prediction {
  double logit = 0.0;
  double p = 0.5;
  bool positive = true;  // p >= 0.5
  std::string label;
  double confidence = 0.0;  // |2p - 1|
};

Prediction prediction_from_logit(double logit, const std::string& positive_label, const std::string& negative_label);

// nullopt when a model feature is missing in `row`.
std::optional<Prediction> predict(const ModelArtifact& model, const DataTable& table, std::size_t row);

// Predicted outcomes for `rows` (unknown elsewhere and for undefined
// predictions), length table.rows().
Outcomes predicted_outcomes(const ModelArtifact& model, const DataTable& table, std::span<const std::size_t> rows);

// Per feature: max |w| over its encoded columns, divided by the largest such
// value (all zeros for an all-zero model). Feature order follows the encoder.
std::vector<std::pair<std::string, double>> feature_importance(const ModelArtifact& model);

enum class SignClass { kNegative, kPositive };

struct FeatureContribution {
  std::string feature;
  double value = 0.0;  // sum of w_i * x_i over the feature's encoded columns
  SignClass sign = SignClass::kPositive;
  double depth = 0.0;  // |value| / max |value| within the row
};

struct ContributionRow {
  std::size_t row = 0;
  std::vector<FeatureContribution> features;
  double intercept = 0.0;
  double logit = 0.0;
};

std::optional<ContributionRow> contributions(const ModelArtifact& model, const DataTable& table, std::size_t row);
// Same decomposition for an already standardized encoded vector.
ContributionRow contributions_for_vector(const ModelArtifact& model, std::span<const double> encoded);

double accuracy(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels,
                std::span<const std::size_t> rows);

// A fitted model together with its split and per-row predictions; this is
// what the model view reads.
struct TrainedModel {
  ModelArtifact artifact;
  SplitSpec spec;
  Split split;
  std::vector<std::optional<Prediction>> predictions;  // every row
  Outcomes outcomes;  // predictions on the test rows, unknown elsewhere
  double test_accuracy = 0.0;
};

TrainedModel train_and_evaluate(const DataTable& table, const SplitSpec& spec, const TrainConfig& config = {});

}  // namespace fairhil
