#pragma once

// Synthetic level-1 data: score blocks with chosen per-model accuracy and
// error correlation.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dgold/l1pf.hpp"

namespace dgold {

struct SynthConfig {
  std::size_t n_train = 10000;
  std::size_t n_test = 2000;
  std::size_t n_classes = 10;
  std::size_t n_models = 7;
  std::vector<double> per_model_accuracy;  // one per model, each in (1/n_classes, 1]
  double error_correlation = 0.0;          // in [0, 1]
  double temperature = 1.0;                // logits are divided by this before the softmax
  double runner_up_hint = 0.5;             // chance a wrong model ranks the true class second
  ScoreKind score_kind = ScoreKind::probs;  // logits: emit log-probabilities
  std::string dataset_name = "synthetic";
  std::uint64_t seed = 0;

  /// Throws ConfigError on any violated bound.
  void validate() const;
};

struct SynthData {
  std::vector<PredictionBlock> train_blocks;  // model order
  std::vector<PredictionBlock> test_blocks;
  LabelVector train_labels;
  LabelVector test_labels;
  std::vector<double> realized_test_accuracy;
};

/// Labels are uniform over the classes. For each sample and model a
/// correlation coin decides whether the model uses the sample's shared
/// uniform and shared confuser class or private draws; the model is correct
/// when its uniform falls below its accuracy, and otherwise predicts the
/// confuser (shared or private). Rows are softmax(g / temperature) of
/// Gaussian logits g whose maximum sits on the predicted class, rounded to
/// float32. Correct predictions get a wider top margin than wrong ones.
/// solo_test_accuracy on every block is the realized test accuracy.
SynthData generate(const SynthConfig& config);

/// n accuracies drawn uniformly from [lo, hi].
std::vector<double> uniform_accuracies(std::size_t n, double lo, double hi, std::uint64_t seed);

/// Name of model m: "synth-00", "synth-01", ...
std::string synth_model_name(std::size_t m);

/// Writes <dir>/<model>.<split>.l1pf for every block and
/// <dir>/labels.<split>.l1lb for both label vectors.
void write_synth(const SynthData& data, const std::filesystem::path& dir);

}  // namespace dgold
