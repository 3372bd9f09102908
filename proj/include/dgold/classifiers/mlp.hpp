#pragma once

#include <span>
#include <string>
#include <vector>

#include "dgold/classifiers/common.hpp"
#include "dgold/random.hpp"

namespace dgold {

enum class Activation { identity, logistic, tanh, relu };
Activation parse_activation(std::string_view s);
std::string_view to_string(Activation a) noexcept;

struct MlpParams {
  std::vector<std::size_t> hidden_layers{64, 64, 64, 64, 64};
  Activation activation = Activation::relu;
  std::string solver = "adam";  // every solver name trains with Adam
  double alpha = 1e-4;          // L2 penalty
  double learning_rate = 1e-3;
  std::size_t batch_size = 200;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  std::size_t n_iter_no_change = 10;
  bool zero_init = false;  // test hook: all parameters start at 0

  static MlpParams from(const Hyperparams& hp);
  Hyperparams to_hyperparams() const;
};

/// "64,64,64" <-> {64, 64, 64}. An empty string means no hidden layers.
std::vector<std::size_t> parse_layer_sizes(std::string_view s);
std::string format_layer_sizes(std::span<const std::size_t> sizes);

/// Fully connected network with a softmax output.
class MlpNetwork {
 public:
  MlpNetwork() = default;

  /// Weights and biases uniform in ±√(6/(fan_in+fan_out)), or all zero.
  static MlpNetwork initialize(std::size_t n_features, std::span<const std::size_t> hidden, std::size_t n_classes,
                               Activation activation, Rng& rng, bool zero_init);

  Matrix predict_proba(const Matrix& x) const;

  /// Mean cross-entropy over the rows plus alpha/(2·rows)·Σ‖W‖². When grad is
  /// non-null it receives the gradient in flat_parameters() order.
  double loss(const Matrix& x, std::span<const Label> y, double alpha, std::vector<double>* grad) const;

  std::size_t parameter_count() const noexcept;
  /// Layer by layer: weights (row-major, fan_in x fan_out), then biases.
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> params);

  std::size_t n_layers() const noexcept { return weights_.size(); }
  Activation activation() const noexcept { return activation_; }

 private:
  std::vector<Matrix> weights_;
  std::vector<std::vector<double>> biases_;
  Activation activation_ = Activation::relu;
};

class MlpModel final : public FittedModel {
 public:
  MlpModel(MlpParams params, MlpNetwork net, std::size_t n_classes, std::size_t n_features);

  Algorithm algorithm() const noexcept override { return Algorithm::MP; }
  const MlpNetwork& network() const noexcept { return net_; }
  Matrix predict_proba(const Matrix& x) const { return net_.predict_proba(x); }

  /// Mean training loss after each epoch.
  const std::vector<double>& loss_curve() const noexcept { return loss_curve_; }
  void set_training_trace(std::vector<double> curve, bool timed_out);

 private:
  Labels predict_rows(const Matrix& features) const override;

  MlpParams params_;
  MlpNetwork net_;
  std::vector<double> loss_curve_;
};

/// Mini-batch Adam on the penalized cross-entropy. Stops after
/// n_iter_no_change epochs without a tolerance-sized improvement of the
/// epoch loss, at max_epochs (default 200), or at the timeout.
MlpModel fit_mlp(const Matrix& x, std::span<const Label> y, std::size_t n_classes, const MlpParams& params,
                 const TrainOptions& opts);

}  // namespace dgold
