#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dgold/classifiers/common.hpp"

namespace dgold {

enum class MaxFeatures { sqrt, log2, all };

struct ForestParams {
  std::size_t n_estimators = 100;
  double min_weight_fraction_leaf = 0.0;
  MaxFeatures max_features = MaxFeatures::sqrt;  // "auto" means sqrt
  bool bootstrap = true;
  std::size_t max_depth = 0;  // 0 = unlimited

  static ForestParams from(const Hyperparams& hp);
  Hyperparams to_hyperparams() const;
  std::size_t features_per_split(std::size_t n_features) const noexcept;
};

/// Gini impurity 1 - Σ p_k² of a weighted class histogram.
double gini_impurity(std::span<const double> class_weights);

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;  // rows with x[feature] <= threshold go left
  double gain = 0.0;       // weighted Gini decrease: G(parent) - wL/w·G(L) - wR/w·G(R)
};

/// Best axis-aligned split over `features` for the weighted rows, or nothing
/// when no split leaves at least min_leaf_weight on both sides. Earlier
/// features and thresholds win exact ties.
std::optional<SplitCandidate> best_gini_split(const Matrix& x, std::span<const Label> y,
                                              std::span<const double> weights, std::span<const std::size_t> rows,
                                              std::span<const std::size_t> features, std::size_t n_classes,
                                              double min_leaf_weight);

class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::uint32_t left = 0, right = 0;
    std::uint32_t leaf = 0;  // offset of the class distribution in leaf_values
  };

  std::span<const double> leaf_distribution(std::span<const double> x) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t leaf_count() const noexcept { return leaf_values_.size() / n_classes_; }

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
  std::vector<double> leaf_values_;  // normalized class distributions
  std::size_t n_classes_ = 0;
};

/// Bootstrap-aggregated CART trees. Each tree votes the argmax of its leaf
/// distribution; the forest takes the plurality with ties broken by summed
/// leaf probability, then lowest class index.
class ForestModel final : public FittedModel {
 public:
  ForestModel(ForestParams params, std::vector<DecisionTree> trees, std::size_t n_classes, std::size_t n_features,
              bool timed_out);

  Algorithm algorithm() const noexcept override { return Algorithm::RF; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 private:
  Labels predict_rows(const Matrix& features) const override;

  ForestParams params_;
  std::vector<DecisionTree> trees_;
};

/// Trees are grown in parallel; tree t uses a seed derived from (seed, t),
/// so the thread count never changes the result.
ForestModel fit_random_forest(const Matrix& x, std::span<const Label> y, std::size_t n_classes,
                              const ForestParams& params, const TrainOptions& opts);

}  // namespace dgold
