#include <gtest/gtest.h>

#include <cmath>

#include "dgold/classifiers/linear.hpp"
#include "dgold/classifiers/mlp.hpp"
#include "dgold/error.hpp"
#include "dgold/stacker.hpp"
#include "test_util.hpp"

using namespace dgold;

TEST(Mlp, LayerSizeStrings) {
  EXPECT_EQ(parse_layer_sizes("64,64,64"), (std::vector<std::size_t>{64, 64, 64}));
  EXPECT_TRUE(parse_layer_sizes("").empty());
  EXPECT_EQ(format_layer_sizes(std::vector<std::size_t>{64, 32}), "64,32");
  EXPECT_THROW(parse_layer_sizes("64,,64"), FitError);
  EXPECT_THROW(parse_layer_sizes("0"), FitError);
  EXPECT_THROW(parse_activation("gelu"), FitError);
  EXPECT_EQ(parse_activation("logistic"), Activation::logistic);
}

TEST(Mlp, NoHiddenLayersReducesToLogisticRegression) {
  // Full-batch training of a hidden-layer-free network minimizes the same
  // objective as logistic regression with C = 1/alpha.
  Rng rng(70);
  Matrix x;
  Labels y;
  testutil::blobs(150, 4, 3, 1.3, rng, x, y);
  MlpParams mp;
  mp.hidden_layers = {};
  mp.alpha = 0.1;
  mp.batch_size = 1000;
  mp.learning_rate = 0.05;
  TrainOptions mo;
  mo.seed = 3;
  mo.max_epochs = 3000;
  mo.tolerance = 1e-9;
  mp.n_iter_no_change = 50;
  const auto net = fit_mlp(x, y, 3, mp, mo);

  LogisticParams lp;
  lp.c = 1.0 / mp.alpha;
  TrainOptions lo;
  lo.max_epochs = 5000;
  lo.tolerance = 1e-8;
  const auto lr = fit_logistic(x, y, 3, lp, lo);

  const Matrix q = testutil::random_matrix(400, 4, rng, -1, 3);
  const Labels a = net.predict(q), b = lr.predict(q);
  EXPECT_GE(accuracy(a, b), 0.95);
  const Matrix pa = net.predict_proba(x), pb = predict_proba(lr, x);
  double worst = 0.0;
  for (std::size_t i = 0; i < pa.data().size(); ++i) worst = std::max(worst, std::abs(pa.data()[i] - pb.data()[i]));
  EXPECT_LE(worst, 0.02);
}

TEST(Mlp, ZeroInitialisationGivesUniformOutput) {
  Rng rng(71);
  const std::vector<std::size_t> hidden{5, 4};
  const auto net = MlpNetwork::initialize(3, hidden, 4, Activation::relu, rng, true);
  const Matrix p = net.predict_proba(testutil::random_matrix(10, 3, rng));
  for (double v : p.data()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Mlp, InitialisationBounds) {
  Rng rng(72);
  const std::vector<std::size_t> hidden{8};
  const auto net = MlpNetwork::initialize(4, hidden, 3, Activation::relu, rng, false);
  EXPECT_EQ(net.parameter_count(), 4u * 8 + 8 + 8 * 3 + 3);
  const auto theta = net.flat_parameters();
  const double b1 = std::sqrt(6.0 / 12.0), b2 = std::sqrt(6.0 / 11.0);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_LE(std::abs(theta[i]), b1);
  for (std::size_t i = 40; i < theta.size(); ++i) EXPECT_LE(std::abs(theta[i]), b2);
}

TEST(Mlp, GradientMatchesFiniteDifferences) {
  Rng rng(73);
  const Matrix x = testutil::random_matrix(6, 2, rng);
  const Labels y = testutil::random_labels(6, 2, rng);
  const std::vector<std::size_t> hidden{3};
  for (Activation act : {Activation::tanh, Activation::logistic, Activation::identity}) {
    auto net = MlpNetwork::initialize(2, hidden, 2, act, rng, false);
    ASSERT_LE(net.parameter_count(), 20u);
    std::vector<double> grad;
    net.loss(x, y, 0.1, &grad);
    const auto theta = net.flat_parameters();
    const double h = 1e-6;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      auto tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      net.set_flat_parameters(tp);
      const double fp = net.loss(x, y, 0.1, nullptr);
      net.set_flat_parameters(tm);
      const double fm = net.loss(x, y, 0.1, nullptr);
      EXPECT_LE(std::abs(grad[j] - (fp - fm) / (2 * h)), 1e-5) << to_string(act) << " param " << j;
    }
    net.set_flat_parameters(theta);
  }
}

TEST(Mlp, LearnsSeparableBlobsAndIsDeterministic) {
  Rng rng(74);
  Matrix x;
  Labels y;
  testutil::blobs(120, 6, 3, 0.5, rng, x, y);
  MlpParams p;
  p.hidden_layers = {16};
  TrainOptions o;
  o.seed = 11;
  o.max_epochs = 100;
  const auto a = fit_mlp(x, y, 3, p, o);
  const auto b = fit_mlp(x, y, 3, p, o);
  EXPECT_EQ(a.network().flat_parameters(), b.network().flat_parameters());
  EXPECT_GE(accuracy(a.predict(x), y), 0.95);
  EXPECT_LT(a.loss_curve().back(), a.loss_curve().front());
}

TEST(Mlp, Errors) {
  const Matrix x{{0}, {1}};
  const Labels y{0, 1};
  MlpParams p;
  p.learning_rate = 0.0;
  EXPECT_THROW(fit_mlp(x, y, 2, p, TrainOptions{}), FitError);
  EXPECT_THROW(MlpParams::from({{"batch_size", std::int64_t{0}}}), FitError);
  EXPECT_THROW(MlpParams::from({{"momentum", 0.9}}), FitError);
  Rng rng(1);
  auto net = MlpNetwork::initialize(1, std::vector<std::size_t>{}, 2, Activation::relu, rng, false);
  EXPECT_THROW(net.set_flat_parameters(std::vector<double>(3)), ShapeError);
}
