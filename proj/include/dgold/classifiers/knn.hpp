#pragma once

#include <string>

#include "dgold/classifiers/common.hpp"

namespace dgold {

enum class NeighborWeights { uniform, distance };

struct KnnParams {
  std::size_t n_neighbors = 5;
  NeighborWeights weights = NeighborWeights::uniform;
  std::string algorithm = "auto";  // search structure name; the scan is always brute force

  static KnnParams from(const Hyperparams& hp);
  Hyperparams to_hyperparams() const;
};

/// Brute-force Euclidean k-nearest-neighbour classifier.
///
/// Neighbours are ranked by (distance, training index). Uniform weighting
/// counts votes; distance weighting uses 1/d, except that when any of the k
/// neighbours sits at distance zero only the zero-distance neighbours vote.
/// Vote ties resolve to the lowest class index.
class KnnModel final : public FittedModel {
 public:
  KnnModel(KnnParams params, Matrix train_x, Labels train_y, std::size_t n_classes);

  Algorithm algorithm() const noexcept override { return Algorithm::KN; }
  const KnnParams& params() const noexcept { return params_; }

 private:
  Labels predict_rows(const Matrix& features) const override;
  Label predict_one(std::span<const double> dist, std::vector<std::pair<double, std::size_t>>& scratch) const;

  KnnParams params_;
  std::size_t n_train_ = 0;
  // Training rows in blocks of 8, feature-major within a block, zero-padded.
  std::vector<double> blocked_;
  Labels train_y_;
};

/// Throws FitError when k is 0 or exceeds the number of training rows.
KnnModel fit_knn(const Matrix& x, std::span<const Label> y, std::size_t n_classes, const KnnParams& params);

}  // namespace dgold
