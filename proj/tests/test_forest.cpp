#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dgold/classifiers/forest.hpp"
#include "dgold/error.hpp"
#include "dgold/stacker.hpp"
#include "test_util.hpp"

using namespace dgold;

namespace {

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST(Gini, Impurity) {
  EXPECT_DOUBLE_EQ(gini_impurity(std::vector<double>{4, 0}), 0.0);
  EXPECT_DOUBLE_EQ(gini_impurity(std::vector<double>{2, 2}), 0.5);
  EXPECT_DOUBLE_EQ(gini_impurity(std::vector<double>{1, 1, 1}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(gini_impurity(std::vector<double>{1, 4}), 0.32);
}

TEST(Gini, HandEvaluatedBestSplit) {
  // y = 0 0 0 1 0 1 1 1 over x = 1..8. Splits at 3.5 and 5.5 both reach a gain
  // of 0.5 - 5/8·0.32 = 0.3; the earlier threshold wins. 4.5 reaches only 0.125.
  Matrix x(8, 1);
  for (std::size_t i = 0; i < 8; ++i) x(i, 0) = static_cast<double>(i + 1);
  const Labels y{0, 0, 0, 1, 0, 1, 1, 1};
  const std::vector<double> w(8, 1.0);
  const auto rows = iota_n(8);
  const std::vector<std::size_t> feats{0};
  const auto s = best_gini_split(x, y, w, rows, feats, 2, 0.0);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->feature, 0u);
  EXPECT_DOUBLE_EQ(s->threshold, 3.5);
  EXPECT_NEAR(s->gain, 0.3, 1e-12);

  // Weight 3 on each side of the 4.5 cut forces the best split there.
  const auto forced = best_gini_split(x, y, w, rows, feats, 2, 4.0);
  ASSERT_TRUE(forced.has_value());
  EXPECT_DOUBLE_EQ(forced->threshold, 4.5);
  EXPECT_NEAR(forced->gain, 0.125, 1e-12);

  EXPECT_FALSE(best_gini_split(x, y, w, rows, feats, 2, 4.5).has_value());
}

TEST(Gini, ConstantFeatureHasNoSplit) {
  const Matrix x{{1, 0}, {1, 1}, {1, 2}};
  const Labels y{0, 1, 1};
  const std::vector<double> w(3, 1.0);
  const auto rows = iota_n(3);
  EXPECT_FALSE(best_gini_split(x, y, w, rows, std::vector<std::size_t>{0}, 2, 0.0).has_value());
  const auto s = best_gini_split(x, y, w, rows, std::vector<std::size_t>{0, 1}, 2, 0.0);
  ASSERT_TRUE(s.has_value());
  EXPECT_EQ(s->feature, 1u);
  EXPECT_DOUBLE_EQ(s->threshold, 0.5);
}

TEST(Forest, PureLabelsGiveSingleLeafTrees) {
  Rng rng(60);
  const Matrix x = testutil::random_matrix(30, 3, rng);
  const Labels y(30, 2);
  ForestParams p;
  p.n_estimators = 5;
  const auto m = fit_random_forest(x, y, 3, p, TrainOptions{});
  for (const auto& t : m.trees()) EXPECT_EQ(t.node_count(), 1u);
  for (Label l : m.predict(testutil::random_matrix(10, 3, rng))) EXPECT_EQ(l, 2u);
}

TEST(Forest, SingleFullTreeMemorizesDistinctRows) {
  Rng rng(61);
  const Matrix x = testutil::random_matrix(100, 4, rng);
  const Labels y = testutil::random_labels(100, 5, rng);
  ForestParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  p.max_features = MaxFeatures::all;
  const auto m = fit_random_forest(x, y, 5, p, TrainOptions{});
  EXPECT_EQ(m.predict(x), y);
}

TEST(Forest, MinWeightFractionLimitsLeafSize) {
  Rng rng(62);
  const Matrix x = testutil::random_matrix(100, 2, rng);
  const Labels y = testutil::random_labels(100, 2, rng);
  ForestParams p;
  p.n_estimators = 1;
  p.bootstrap = false;
  p.max_features = MaxFeatures::all;
  p.min_weight_fraction_leaf = 0.5;
  const auto m = fit_random_forest(x, y, 2, p, TrainOptions{});
  EXPECT_LE(m.trees().front().leaf_count(), 2u);
  p.min_weight_fraction_leaf = 0.2;
  EXPECT_LE(fit_random_forest(x, y, 2, p, TrainOptions{}).trees().front().leaf_count(), 5u);
}

TEST(Forest, DeterministicAcrossThreadCounts) {
  Rng rng(63);
  Matrix x;
  Labels y;
  testutil::blobs(120, 6, 3, 1.0, rng, x, y);
  ForestParams p;
  p.n_estimators = 12;
  TrainOptions o;
  o.seed = 77;
  setenv("DEEPGOLD_THREADS", "1", 1);
  const auto a = fit_random_forest(x, y, 3, p, o).predict(x);
  setenv("DEEPGOLD_THREADS", "4", 1);
  const auto b = fit_random_forest(x, y, 3, p, o).predict(x);
  unsetenv("DEEPGOLD_THREADS");
  EXPECT_EQ(a, b);
  EXPECT_GE(accuracy(a, y), 0.9);
}

TEST(Forest, FeaturesPerSplit) {
  ForestParams p;
  EXPECT_EQ(p.features_per_split(100), 10u);
  EXPECT_EQ(p.features_per_split(1), 1u);
  p.max_features = MaxFeatures::log2;
  EXPECT_EQ(p.features_per_split(1024), 10u);
  p.max_features = MaxFeatures::all;
  EXPECT_EQ(p.features_per_split(33), 33u);
  EXPECT_EQ(ForestParams::from({{"max_features", std::string("auto")}}).max_features, MaxFeatures::sqrt);
  EXPECT_THROW(ForestParams::from({{"min_weight_fraction_leaf", 0.6}}), FitError);
  EXPECT_THROW(ForestParams::from({{"n_estimators", std::int64_t{0}}}), FitError);
}

TEST(GiniSplit, RowOrderDoesNotChangeTheChosenSplit) {
  // Ascending rows take the radix path, shuffled rows the comparison sort.
  Rng rng(23);
  const std::size_t n = 3000;
  Matrix x(n, 4);
  for (auto& v : x.data()) v = std::round(rng.uniform(-1.0, 1.0) * 40.0) / 40.0;  // many ties
  const auto y = testutil::random_labels(n, 3, rng);
  std::vector<double> w(n);
  for (auto& v : w) v = static_cast<double>(rng.below(3));
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] > 0.0) rows.push_back(i);
  const std::vector<std::size_t> feats{0, 1, 2, 3};
  const auto sorted = best_gini_split(x, y, w, rows, feats, 3, 0.0);
  auto shuffled_rows = rows;
  rng.shuffle(shuffled_rows);
  const auto shuffled = best_gini_split(x, y, w, shuffled_rows, feats, 3, 0.0);
  ASSERT_TRUE(sorted && shuffled);
  EXPECT_EQ(sorted->feature, shuffled->feature);
  EXPECT_EQ(sorted->threshold, shuffled->threshold);
  EXPECT_EQ(sorted->gain, shuffled->gain);
}
