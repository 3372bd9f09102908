#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "dgold/classifiers.hpp"
#include "dgold/error.hpp"
#include "test_util.hpp"

using namespace dgold;
namespace fs = std::filesystem;

namespace {

TrainOptions quick(std::uint64_t seed) {
  TrainOptions o;
  o.seed = seed;
  o.max_epochs = 30;
  return o;
}

Hyperparams small_hp(Algorithm a) {
  switch (a) {
    case Algorithm::RF: return {{"n_estimators", std::int64_t{15}}};
    case Algorithm::MP: return {{"hidden_layer_sizes", std::string("16")}, {"learning_rate_init", 0.05}};
    case Algorithm::KN: return {{"weights", std::string("distance")}};
    default: return {};
  }
}

StackedDataset make_dataset(std::size_t n, Split split, Rng& rng) {
  std::vector<PredictionBlock> blocks;
  for (int m = 0; m < 2; ++m) blocks.push_back(testutil::random_prob_block("m" + std::to_string(m), n, 3, rng, split));
  LabelVector labels{"toy", split, 3, testutil::random_labels(n, 3, rng)};
  return build_stacked_dataset(blocks, labels);
}

fs::path write_script(const std::string& name, const std::string& body) {
  const auto path = fs::temp_directory_path() / ("dgold-test-" + std::to_string(::getpid()) + "-" + name);
  std::ofstream(path) << "#!/bin/sh\n" << body << '\n';
  fs::permissions(path, fs::perms::owner_all);
  return path;
}

}  // namespace

TEST(Registry, EveryLearnerFitsAndPredictsInRange) {
  Rng rng(80);
  Matrix x;
  Labels y;
  testutil::blobs(90, 6, 3, 0.6, rng, x, y);
  for (Algorithm a : kAllAlgorithms) {
    const auto m = fit(a, x, y, 3, small_hp(a), quick(5));
    EXPECT_EQ(m->algorithm(), a);
    const Labels p = m->predict(x);
    ASSERT_EQ(p.size(), 90u);
    for (Label l : p) EXPECT_LT(l, 3u);
    EXPECT_GE(accuracy(p, y), 0.8) << algorithm_tag(a);
    EXPECT_THROW(m->predict(Matrix(2, 5)), ShapeError) << algorithm_tag(a);
  }
}

TEST(Registry, SameSeedSamePredictions) {
  Rng rng(81);
  const Matrix x = testutil::random_matrix(80, 5, rng);
  const Labels y = testutil::random_labels(80, 4, rng);
  const Matrix q = testutil::random_matrix(40, 5, rng);
  for (Algorithm a : kAllAlgorithms) {
    EXPECT_EQ(fit(a, x, y, 4, small_hp(a), quick(9))->predict(q), fit(a, x, y, 4, small_hp(a), quick(9))->predict(q))
        << algorithm_tag(a);
  }
}

TEST(Registry, DefaultHyperparamsRoundTrip) {
  Rng rng(82);
  Matrix x;
  Labels y;
  testutil::blobs(30, 3, 3, 0.5, rng, x, y);
  for (Algorithm a : kAllAlgorithms) {
    const auto hp = default_hyperparams(a);
    EXPECT_FALSE(hp.empty());
    if (a == Algorithm::RF || a == Algorithm::MP) continue;  // slow at defaults
    EXPECT_NO_THROW(fit(a, x, y, 3, hp, quick(1))) << algorithm_tag(a);
  }
  EXPECT_THROW(fit(Algorithm::RG, x, y, 3, {{"gamma", 1.0}}, quick(1)), FitError);
  EXPECT_EQ(parse_algorithm("rg"), Algorithm::RG);
  EXPECT_THROW(parse_algorithm("XG"), ConfigError);
}

TEST(Registry, RelabellingClassesRelabelsPredictions) {
  // Applying a class permutation to the training labels permutes the
  // predictions. Exact for every learner except the MLP, whose output
  // layer initialisation is tied to the class order.
  Rng rng(83);
  Matrix x;
  Labels y;
  testutil::blobs(120, 5, 3, 1.2, rng, x, y);
  const Label perm[] = {2, 0, 1};
  Labels yp(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) yp[i] = perm[y[i]];
  const Matrix q = testutil::random_matrix(60, 5, rng, -1, 3);
  for (Algorithm a : kAllAlgorithms) {
    const Labels base = fit(a, x, y, 3, small_hp(a), quick(4))->predict(q);
    const Labels moved = fit(a, x, yp, 3, small_hp(a), quick(4))->predict(q);
    Labels mapped(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) mapped[i] = perm[base[i]];
    if (a == Algorithm::MP) {
      // Compare on the training rows, where both fits are constrained.
      const Labels on_x = fit(a, x, y, 3, small_hp(a), quick(4))->predict(x);
      Labels on_x_mapped(on_x.size());
      for (std::size_t i = 0; i < on_x.size(); ++i) on_x_mapped[i] = perm[on_x[i]];
      EXPECT_GE(accuracy(fit(a, x, yp, 3, small_hp(a), quick(4))->predict(x), on_x_mapped), 0.9);
    } else {
      EXPECT_EQ(moved, mapped) << algorithm_tag(a);
    }
  }
}

TEST(Registry, FitFromStackedDataset) {
  Rng rng(84);
  const auto ds = make_dataset(50, Split::train, rng);
  const auto m = fit(Algorithm::RG, ds, {}, TrainOptions{});
  EXPECT_EQ(m->n_features(), 6u);
  EXPECT_EQ(m->n_classes(), 3u);
}

TEST(ExternalLearner, EchoesTestLabels) {
  Rng rng(85);
  const auto train = make_dataset(20, Split::train, rng);
  const auto test = make_dataset(15, Split::test, rng);
  const auto script = write_script("echo.sh", "tail -n +3 \"$2\" | cut -d, -f1");
  const Labels got = run_external_learner(ExternalLearner{script.string(), {}}, train, test, {{"depth", std::int64_t{3}}});
  EXPECT_EQ(got, test.labels.labels);
  fs::remove(script);
}

TEST(ExternalLearner, ReceivesHyperparametersAsJson) {
  Rng rng(86);
  const auto train = make_dataset(5, Split::train, rng);
  const auto test = make_dataset(3, Split::test, rng);
  const auto script = write_script("hp.sh", "[ \"$3\" = '{\"eta\":0.5}' ] || exit 7\nfor i in 1 2 3; do echo 1; done");
  EXPECT_EQ(run_external_learner(ExternalLearner{script.string(), {}}, train, test, {{"eta", 0.5}}), (Labels{1, 1, 1}));
  EXPECT_THROW(run_external_learner(ExternalLearner{script.string(), {}}, train, test, {{"eta", 0.25}}), FitError);
  fs::remove(script);
}

TEST(ExternalLearner, Failures) {
  Rng rng(87);
  const auto train = make_dataset(5, Split::train, rng);
  const auto test = make_dataset(4, Split::test, rng);
  const auto fails = write_script("fail.sh", "exit 3");
  const auto short_out = write_script("short.sh", "echo 0");
  const auto range = write_script("range.sh", "for i in 1 2 3 4; do echo 9; done");
  const auto junk = write_script("junk.sh", "for i in 1 2 3 4; do echo x; done");
  for (const auto& s : {fails, short_out, range, junk}) {
    EXPECT_THROW(run_external_learner(ExternalLearner{s.string(), {}}, train, test, {}), FitError) << s;
    fs::remove(s);
  }
  EXPECT_THROW(run_external_learner(ExternalLearner{"", {}}, train, test, {}), FitError);
}

TEST(Hyperparams, JsonForm) {
  EXPECT_EQ(hyperparams_json({{"alpha", 0.5}, {"penalty", std::string("l1")}, {"k", std::int64_t{3}}, {"b", true}}),
            R"({"alpha":0.5,"b":true,"k":3,"penalty":"l1"})");
  EXPECT_EQ(hyperparams_json({}), "{}");
}
