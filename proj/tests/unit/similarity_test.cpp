#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fairhil/error.hpp"
#include "fairhil/similarity.hpp"
#include "fairhil/synth.hpp"
#include "oracles.hpp"

using namespace fairhil;

TEST(RowSimilarity, MatchesTextbookPearson) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 30);
    std::vector<double> a(d), b(d);
    for (std::size_t i = 0; i < d; ++i) {
      a[i] = g(rng);
      b[i] = 0.4 * a[i] + g(rng);
    }
    const double s = row_similarity(a, b);
    EXPECT_NEAR(s, oracle::pearson(a, b), 1e-12);
    EXPECT_EQ(s, row_similarity(b, a));
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(row_similarity(a, a), 1.0, 1e-15);
  }
}

TEST(RowSimilarity, ConstantVectorsAndErrors) {
  const std::vector<double> c{2, 2, 2}, c2{2, 2, 2}, v{1, 2, 3};
  EXPECT_EQ(row_similarity(c, c2), 1.0);
  EXPECT_EQ(row_similarity(c, v), 0.0);
  EXPECT_THROW((void)row_similarity(std::vector<double>{1}, std::vector<double>{1}), Error);
  EXPECT_THROW((void)row_similarity(v, std::vector<double>{1, 2}), Error);
}

TEST(Scatter, DatasetViewPointsAndJitter) {
  const DataTable t = synth_loans(3, 300);
  const SimilarityIndex idx(t);
  const ScatterData s = scatter(idx, t, 17, View::kDataset);
  ASSERT_EQ(s.points.size(), 300u);
  const Outcomes y = t.outcomes();
  std::size_t selected = 0;
  for (const auto& p : s.points) {
    EXPECT_NEAR(p.x, y[p.row] == 1 ? 1.0 : 0.0, 0.15 + 1e-12);
    EXPECT_NEAR(p.similarity, row_similarity(idx.values(17), idx.values(p.row)), 0.0);
    selected += p.selected;
    EXPECT_FALSE(p.predicted);
  }
  EXPECT_EQ(selected, 1u);
  EXPECT_NEAR(s.points[17].similarity, 1.0, 1e-12);
  EXPECT_EQ(scatter_jitter(5), scatter_jitter(5));
  EXPECT_THROW((void)scatter(idx, t, 300, View::kDataset), Error);
  EXPECT_THROW((void)scatter(idx, t, 0, View::kModel), Error);
}

TEST(Scatter, ModelViewUsesConfidence) {
  const DataTable t = synth_loans(3, 300);
  const SimilarityIndex idx(t);
  const TrainedModel m = train_and_evaluate(t, SplitSpec{0, 0.2});
  const ScatterData s = scatter(idx, t, 0, View::kModel, m.predictions);
  for (const auto& p : s.points) {
    ASSERT_TRUE(m.predictions[p.row]);
    EXPECT_EQ(p.x, m.predictions[p.row]->confidence);
    EXPECT_EQ(p.predicted, m.predictions[p.row]->label);
  }
}

TEST(SimilarityIndex, ExcludesTargetAndImputesMissing) {
  std::mt19937_64 rng(5);
  const DataTable t = oracle::random_table(rng, 80, 6, 0.2);
  const SimilarityIndex idx(t);
  for (const auto& c : idx.encoder().columns()) EXPECT_NE(c.feature, "y");
  bool any = false;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const RowVector v = idx.vector(r);
    for (std::size_t j = 0; j < v.values.size(); ++j) {
      if (v.imputed[j]) {
        any = true;
        EXPECT_EQ(v.values[j], 0.0);
      }
    }
  }
  EXPECT_TRUE(any);
}

TEST(ComparePair, ScoresAndOrder) {
  std::vector<std::optional<std::string>> g{"a", "b", "a", std::nullopt};
  std::vector<std::optional<std::string>> y{"0", "1", "1", "0"};
  const DataTable t({Column::numeric("n", {0, 10, 5, NAN}), Column::from_labels("g", g), Column::from_labels("y", y)});
  const DataTable tt = t.with_target("y", "1");
  const PairComparison c = compare_pair(tt, 0, 2);
  ASSERT_EQ(c.features.size(), 2u);
  EXPECT_EQ(c.features[0].name, "n");
  EXPECT_DOUBLE_EQ(c.features[0].score, 0.5);
  EXPECT_EQ(c.features[1].score, 1.0);
  const PairComparison m = compare_pair(tt, 0, 3);
  EXPECT_EQ(m.features[0].score, 0.0);
  EXPECT_EQ(m.features[0].value_b, "");
  const PairComparison self = compare_pair(tt, 1, 1);
  for (const auto& f : self.features) EXPECT_EQ(f.score, 1.0);
  EXPECT_THROW((void)compare_pair(tt, 0, 9), Error);
}
