#include "fairhil/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "fairhil/error.hpp"

namespace fairhil {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Split split(const DataTable& table, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw Error(ErrorCode::kValidation, "test_fraction must be in (0, 1)");
  }
  const Outcomes y = table.outcomes();
  std::vector<std::size_t> by_class[2];
  for (std::size_t r = 0; r < y.size(); ++r) {
    if (y[r] != kUnknownOutcome) by_class[y[r]].push_back(r);
  }
  std::mt19937_64 rng(spec.seed);
  Split out;
  for (int c : {0, 1}) {
    auto& rows = by_class[c];
    if (rows.size() < 2) {
      const std::string label = c == 1 ? table.positive_label() : table.negative_label();
      throw Error(ErrorCode::kValidation, "target class '" + label + "' has fewer than 2 rows; cannot split");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(rows.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    out.test.insert(out.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

LogisticObjective::LogisticObjective(const MatrixXd& x, const VectorXd& y, double l2) : x_(x), y_(y), l2_(l2) {
  if (x.rows() != y.size()) throw Error(ErrorCode::kValidation, "design matrix and labels differ in length");
}

VectorXd LogisticObjective::logits(const VectorXd& params) const {
  const Eigen::Index d = x_.cols();
  return (x_ * params.head(d)).array() + params(d);
}

double LogisticObjective::value(const VectorXd& params) const {
  const Eigen::Index d = x_.cols();
  const VectorXd z = logits(params);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum += softplus(z(i)) - y_(i) * z(i);
  const double n = std::max<double>(1.0, static_cast<double>(z.size()));
  return sum / n + 0.5 * l2_ * params.head(d).squaredNorm();
}

VectorXd LogisticObjective::gradient(const VectorXd& params) const {
  const Eigen::Index d = x_.cols();
  const VectorXd z = logits(params);
  VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r(i) = sigmoid(z(i)) - y_(i);
  const double n = std::max<double>(1.0, static_cast<double>(z.size()));
  VectorXd g(d + 1);
  g.head(d) = x_.transpose() * r / n + l2_ * params.head(d);
  g(d) = r.sum() / n;
  return g;
}

MatrixXd LogisticObjective::hessian(const VectorXd& params) const {
  const Eigen::Index d = x_.cols();
  const VectorXd z = logits(params);
  VectorXd s(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double p = sigmoid(z(i));
    s(i) = p * (1.0 - p);
  }
  const double n = std::max<double>(1.0, static_cast<double>(z.size()));
  MatrixXd h(d + 1, d + 1);
  const MatrixXd xs = x_.array().colwise() * s.array();
  h.topLeftCorner(d, d) = x_.transpose() * xs / n;
  h.topLeftCorner(d, d).diagonal().array() += l2_;
  const VectorXd cross = xs.colwise().sum().transpose() / n;
  h.topRightCorner(d, 1) = cross;
  h.bottomLeftCorner(1, d) = cross.transpose();
  h(d, d) = s.sum() / n;
  return h;
}

LogisticFit fit_logistic(const MatrixXd& x, const VectorXd& y, const TrainConfig& config) {
  const LogisticObjective obj(x, y, config.l2);
  VectorXd params = VectorXd::Zero(obj.parameter_count());
  double f = obj.value(params);
  LogisticFit fit;
  for (int it = 0; it < config.max_iterations; ++it) {
    const VectorXd g = obj.gradient(params);
    if (g.cwiseAbs().maxCoeff() <= config.tolerance) {
      fit.converged = true;
      break;
    }
    MatrixXd h = obj.hessian(params);
    // Tiny ridge keeps the intercept block solvable when probabilities saturate.
    h.diagonal().array() += 1e-12;
    Eigen::LDLT<MatrixXd> ldlt(h);
    VectorXd dir = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !dir.allFinite() || g.dot(dir) >= 0.0) dir = -g;
    double step = 1.0;
    const double slope = g.dot(dir);
    VectorXd next;
    double f_next = f;
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      next = params + step * dir;
      f_next = obj.value(next);
      if (f_next <= f + 1e-4 * step * slope) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    fit.iterations = it + 1;
    if (!moved) break;
    params = std::move(next);
    f = f_next;
  }
  if (!fit.converged && obj.gradient(params).cwiseAbs().maxCoeff() <= config.tolerance) fit.converged = true;
  const Eigen::Index d = x.cols();
  fit.weights = params.head(d);
  fit.intercept = params(d);
  fit.final_loss = f;
  return fit;
}

std::vector<std::string> model_features(const DataTable& table) {
  std::vector<std::string> out;
  for (const auto& c : table.columns()) {
    if (c.derived_from()) continue;
    if (table.has_target() && c.name() == table.target()) continue;
    out.push_back(c.name());
  }
  return out;
}

ModelArtifact train_logistic(const DataTable& table, std::span<const std::size_t> train_rows,
                             const TrainConfig& config) {
  ModelArtifact model;
  model.encoder = Encoder::fit(table, model_features(table), train_rows);
  model.positive_label = table.positive_label();
  model.negative_label = table.negative_label();
  model.l2 = config.l2;

  const Outcomes y_all = table.outcomes();
  const std::size_t d = model.encoder.width();
  std::vector<std::size_t> used;
  std::vector<double> buf(d);
  std::vector<std::vector<double>> rows;
  for (std::size_t r : train_rows) {
    if (y_all[r] == kUnknownOutcome || !model.encoder.encode_row(table, r, buf)) continue;
    used.push_back(r);
    rows.push_back(buf);
  }
  if (used.empty()) throw Error(ErrorCode::kValidation, "no complete training rows");
  MatrixXd x(static_cast<Eigen::Index>(used.size()), static_cast<Eigen::Index>(d));
  VectorXd y(static_cast<Eigen::Index>(used.size()));
  for (std::size_t i = 0; i < used.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    y(static_cast<Eigen::Index>(i)) = y_all[used[i]];
  }
  const LogisticFit fit = fit_logistic(x, y, config);
  model.weights = fit.weights;
  model.intercept = fit.intercept;
  model.iterations = fit.iterations;
  model.final_loss = fit.final_loss;
  model.converged = fit.converged;
  model.training_rows = used.size();
  return model;
}

Prediction prediction_from_logit(double logit, const std::string& positive_label, const std::string& negative_label) {
  Prediction p;
  p.logit = logit;
  p.p = sigmoid(logit);
  p.positive = p.p >= 0.5;
  p.label = p.positive ? positive_label : negative_label;
  p.confidence = std::abs(2.0 * p.p - 1.0);
  return p;
}

std::optional<Prediction> predict(const ModelArtifact& model, const DataTable& table, std::size_t row) {
  std::vector<double> x(model.encoder.width());
  if (!model.encoder.encode_row(table, row, x)) return std::nullopt;
  double logit = model.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) logit += model.weights(static_cast<Eigen::Index>(j)) * x[j];
  return prediction_from_logit(logit, model.positive_label, model.negative_label);
}

Outcomes predicted_outcomes(const ModelArtifact& model, const DataTable& table, std::span<const std::size_t> rows) {
  Outcomes out(table.rows(), kUnknownOutcome);
  for (std::size_t r : rows) {
    if (const auto p = predict(model, table, r)) out[r] = p->positive ? 1 : 0;
  }
  return out;
}

std::vector<std::pair<std::string, double>> feature_importance(const ModelArtifact& model) {
  std::vector<std::pair<std::string, double>> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& f : model.encoder.features()) {
    slot.emplace(f, out.size());
    out.emplace_back(f, 0.0);
  }
  const auto& cols = model.encoder.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    auto& v = out[slot.at(cols[j].feature)].second;
    v = std::max(v, std::abs(model.weights(static_cast<Eigen::Index>(j))));
  }
  double top = 0.0;
  for (const auto& [f, v] : out) top = std::max(top, v);
  for (auto& [f, v] : out) v = top > 0.0 ? v / top : 0.0;
  return out;
}

ContributionRow contributions_for_vector(const ModelArtifact& model, std::span<const double> encoded) {
  ContributionRow row;
  std::map<std::string, std::size_t> slot;
  for (const auto& f : model.encoder.features()) {
    slot.emplace(f, row.features.size());
    row.features.push_back(FeatureContribution{f});
  }
  const auto& cols = model.encoder.columns();
  double logit = model.intercept;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const double c = model.weights(static_cast<Eigen::Index>(j)) * encoded[j];
    row.features[slot.at(cols[j].feature)].value += c;
    logit += c;
  }
  double top = 0.0;
  for (const auto& f : row.features) top = std::max(top, std::abs(f.value));
  for (auto& f : row.features) {
    f.sign = f.value < 0.0 ? SignClass::kNegative : SignClass::kPositive;
    f.depth = top > 0.0 ? std::abs(f.value) / top : 0.0;
  }
  row.intercept = model.intercept;
  row.logit = logit;
  return row;
}

std::optional<ContributionRow> contributions(const ModelArtifact& model, const DataTable& table, std::size_t row) {
  std::vector<double> x(model.encoder.width());
  if (!model.encoder.encode_row(table, row, x)) return std::nullopt;
  ContributionRow out = contributions_for_vector(model, x);
  out.row = row;
  return out;
}

double accuracy(std::span<const std::int8_t> predictions, std::span<const std::int8_t> labels,
                std::span<const std::size_t> rows) {
  std::size_t total = 0, right = 0;
  for (std::size_t r : rows) {
    if (predictions[r] == kUnknownOutcome || labels[r] == kUnknownOutcome) continue;
    ++total;
    right += predictions[r] == labels[r] ? 1 : 0;
  }
  return total ? static_cast<double>(right) / static_cast<double>(total) : 0.0;
}

TrainedModel train_and_evaluate(const DataTable& table, const SplitSpec& spec, const TrainConfig& config) {
  TrainedModel out;
  out.spec = spec;
  out.split = split(table, spec);
  out.artifact = train_logistic(table, out.split.train, config);
  out.predictions.reserve(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) out.predictions.push_back(predict(out.artifact, table, r));
  out.outcomes.assign(table.rows(), kUnknownOutcome);
  for (const auto r : out.split.test) {
    if (out.predictions[r]) out.outcomes[r] = out.predictions[r]->positive ? 1 : 0;
  }
  const Outcomes labels = table.outcomes();
  out.test_accuracy = accuracy(out.outcomes, labels, out.split.test);
  return out;
}

}  // namespace fairhil
