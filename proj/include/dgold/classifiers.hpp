#pragma once

// Single fit/predict entry point over the seven level-2 learners.

#include <filesystem>
#include <memory>
#include <string>

#include "dgold/classifiers/common.hpp"
#include "dgold/classifiers/forest.hpp"
#include "dgold/classifiers/knn.hpp"
#include "dgold/classifiers/linear.hpp"
#include "dgold/classifiers/mlp.hpp"
#include "dgold/stacker.hpp"

namespace dgold {

/// Fits `algorithm` with the given hyperparameters (missing keys take the
/// learner defaults). Throws FitError on bad data or hyperparameters.
std::unique_ptr<FittedModel> fit(Algorithm algorithm, const Matrix& x, std::span<const Label> y,
                                 std::size_t n_classes, const Hyperparams& hp, const TrainOptions& opts);
std::unique_ptr<FittedModel> fit(Algorithm algorithm, const StackedDataset& train, const Hyperparams& hp,
                                 const TrainOptions& opts);

/// Every hyperparameter of the learner at its default value.
Hyperparams default_hyperparams(Algorithm algorithm);

/// Learner run as a child process:
///   <command> <train.csv> <test.csv> '<json hyperparameters>'
/// The CSV files use the stacked-dataset text format. The child prints one
/// predicted label per test row on stdout. A nonzero exit, a wrong line
/// count or an out-of-range label raises FitError.
struct ExternalLearner {
  std::string command;
  std::filesystem::path work_dir;  // empty: a fresh directory under the system temp path
};

Labels run_external_learner(const ExternalLearner& learner, const StackedDataset& train, const StackedDataset& test,
                            const Hyperparams& hp);

/// JSON object form of a hyperparameter map.
std::string hyperparams_json(const Hyperparams& hp);

}  // namespace dgold
