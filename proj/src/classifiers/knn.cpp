#include "dgold/classifiers/knn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dgold/error.hpp"
#include "dgold/parallel.hpp"

namespace dgold {

namespace {

constexpr std::string_view kKnnKeys[] = {"n_neighbors", "weights", "algorithm"};
constexpr std::size_t kBlock = 8;

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__) && defined(__linux__)
#define DGOLD_KNN_CLONES __attribute__((target_clones("avx512f", "avx2", "default")))
#else
#define DGOLD_KNN_CLONES
#endif

constexpr std::size_t kQueryGroup = 16;

// Squared distances from each of nq queries to every blocked training row;
// out is nq x (n_blocks * kBlock). Each lane sums its own row over features in
// ascending order, as squared_distance does. Queries are grouped so that a
// training block is read once per group.
DGOLD_KNN_CLONES void blocked_distances(const double* __restrict queries, std::size_t nq,
                                        const double* __restrict blocked, std::size_t n_blocks, std::size_t d,
                                        double* __restrict out) {
  using v8d = double __attribute__((vector_size(kBlock * sizeof(double))));
  const std::size_t stride = n_blocks * kBlock;
  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    const double* base = blocked + blk * kBlock * d;
    for (std::size_t q = 0; q < nq; ++q) {
      const double* query = queries + q * d;
      v8d s{};
      for (std::size_t j = 0; j < d; ++j) {
        v8d x;
        std::memcpy(&x, base + j * kBlock, sizeof x);
        const v8d diff = query[j] - x;
        s += diff * diff;
      }
      std::memcpy(out + q * stride + blk * kBlock, &s, sizeof s);
    }
  }
}

}  // namespace

KnnParams KnnParams::from(const Hyperparams& hp) {
  hp_check_keys(hp, kKnnKeys, "KN");
  KnnParams p;
  const auto k = hp_int(hp, "n_neighbors", static_cast<std::int64_t>(p.n_neighbors));
  if (k < 1) throw FitError("n_neighbors must be at least 1");
  p.n_neighbors = static_cast<std::size_t>(k);
  const auto w = hp_string(hp, "weights", "uniform");
  if (w == "uniform") {
    p.weights = NeighborWeights::uniform;
  } else if (w == "distance") {
    p.weights = NeighborWeights::distance;
  } else {
    throw FitError("weights must be 'uniform' or 'distance'");
  }
  p.algorithm = hp_string(hp, "algorithm", p.algorithm);
  return p;
}

Hyperparams KnnParams::to_hyperparams() const {
  return {{"n_neighbors", static_cast<std::int64_t>(n_neighbors)},
          {"weights", std::string(weights == NeighborWeights::uniform ? "uniform" : "distance")},
          {"algorithm", algorithm}};
}

KnnModel::KnnModel(KnnParams params, Matrix train_x, Labels train_y, std::size_t n_classes)
    : FittedModel(params.to_hyperparams(), n_classes, train_x.cols()),
      params_(std::move(params)),
      n_train_(train_x.rows()),
      train_y_(std::move(train_y)) {
  const std::size_t d = train_x.cols(), n_blocks = (n_train_ + kBlock - 1) / kBlock;
  blocked_.assign(n_blocks * kBlock * d, 0.0);
  for (std::size_t i = 0; i < n_train_; ++i)
    for (std::size_t j = 0; j < d; ++j) blocked_[(i / kBlock) * kBlock * d + j * kBlock + i % kBlock] = train_x(i, j);
}

Label KnnModel::predict_one(std::span<const double> dist,
                            std::vector<std::pair<double, std::size_t>>& scratch) const {
  const std::size_t n = n_train_;
  const std::size_t k = params_.n_neighbors;
  // Max-heap of the k smallest (distance, index) pairs, then ascending order.
  scratch.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const std::pair<double, std::size_t> e{dist[i], i};
    if (scratch.size() < k) {
      scratch.push_back(e);
      std::push_heap(scratch.begin(), scratch.end());
    } else if (e < scratch.front()) {
      std::pop_heap(scratch.begin(), scratch.end());
      scratch.back() = e;
      std::push_heap(scratch.begin(), scratch.end());
    }
  }
  std::sort_heap(scratch.begin(), scratch.end());

  std::vector<double> score(n_classes(), 0.0);
  const auto nearest = std::span(scratch).first(k);
  const bool exact_hit = std::any_of(nearest.begin(), nearest.end(), [](const auto& e) { return e.first == 0.0; });
  for (const auto& [d2, idx] : nearest) {
    double vote = 1.0;
    if (params_.weights == NeighborWeights::distance) {
      if (exact_hit) {
        vote = d2 == 0.0 ? 1.0 : 0.0;
      } else {
        vote = 1.0 / std::sqrt(d2);
      }
    }
    score[train_y_[idx]] += vote;
  }
  return static_cast<Label>(argmax(score));
}

Labels KnnModel::predict_rows(const Matrix& features) const {
  Labels out(features.rows());
  const std::size_t d = features.cols(), n_blocks = (n_train_ + kBlock - 1) / kBlock;
  const std::size_t chunks = std::min<std::size_t>(features.rows(), 64);
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<std::pair<double, std::size_t>> scratch;
    std::vector<double> dist(kQueryGroup * n_blocks * kBlock);
    const std::size_t begin = features.rows() * c / chunks, end = features.rows() * (c + 1) / chunks;
    for (std::size_t i = begin; i < end; i += kQueryGroup) {
      const std::size_t nq = std::min(kQueryGroup, end - i);
      blocked_distances(features.row(i).data(), nq, blocked_.data(), n_blocks, d, dist.data());
      for (std::size_t q = 0; q < nq; ++q) {
        out[i + q] = predict_one(std::span(dist).subspan(q * n_blocks * kBlock, n_train_), scratch);
      }
    }
  });
  return out;
}

KnnModel fit_knn(const Matrix& x, std::span<const Label> y, std::size_t n_classes, const KnnParams& params) {
  check_training_data(x, y, n_classes);
  if (params.n_neighbors == 0) throw FitError("n_neighbors must be at least 1");
  if (params.n_neighbors > x.rows()) {
    throw FitError("n_neighbors " + std::to_string(params.n_neighbors) + " exceeds the " + std::to_string(x.rows()) +
                   " training rows");
  }
  return KnnModel(params, x, Labels(y.begin(), y.end()), n_classes);
}

}  // namespace dgold
