#include "dgold/classifiers/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "dgold/error.hpp"
#include "dgold/parallel.hpp"
#include "dgold/random.hpp"
#include "dgold/stacker.hpp"

namespace dgold {

namespace {
constexpr std::string_view kForestKeys[] = {"n_estimators", "min_weight_fraction_leaf", "max_features", "bootstrap",
                                            "max_depth"};
}

ForestParams ForestParams::from(const Hyperparams& hp) {
  hp_check_keys(hp, kForestKeys, "RF");
  ForestParams p;
  const auto n = hp_int(hp, "n_estimators", static_cast<std::int64_t>(p.n_estimators));
  if (n < 1) throw FitError("n_estimators must be at least 1");
  p.n_estimators = static_cast<std::size_t>(n);
  p.min_weight_fraction_leaf = hp_real(hp, "min_weight_fraction_leaf", p.min_weight_fraction_leaf);
  if (!(p.min_weight_fraction_leaf >= 0.0 && p.min_weight_fraction_leaf <= 0.5)) {
    throw FitError("min_weight_fraction_leaf must lie in [0, 0.5]");
  }
  const auto mf = hp_string(hp, "max_features", "sqrt");
  if (mf == "auto" || mf == "sqrt") {
    p.max_features = MaxFeatures::sqrt;
  } else if (mf == "log2") {
    p.max_features = MaxFeatures::log2;
  } else if (mf == "all" || mf == "none") {
    p.max_features = MaxFeatures::all;
  } else {
    throw FitError("max_features must be one of auto, sqrt, log2, all");
  }
  p.bootstrap = hp_bool(hp, "bootstrap", p.bootstrap);
  const auto depth = hp_int(hp, "max_depth", 0);
  if (depth < 0) throw FitError("max_depth must be non-negative");
  p.max_depth = static_cast<std::size_t>(depth);
  return p;
}

Hyperparams ForestParams::to_hyperparams() const {
  const char* mf = max_features == MaxFeatures::sqrt ? "sqrt" : max_features == MaxFeatures::log2 ? "log2" : "all";
  return {{"n_estimators", static_cast<std::int64_t>(n_estimators)},
          {"min_weight_fraction_leaf", min_weight_fraction_leaf},
          {"max_features", std::string(mf)},
          {"bootstrap", bootstrap},
          {"max_depth", static_cast<std::int64_t>(max_depth)}};
}

std::size_t ForestParams::features_per_split(std::size_t n_features) const noexcept {
  std::size_t m = n_features;
  if (max_features == MaxFeatures::sqrt) m = static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features)));
  if (max_features == MaxFeatures::log2) m = static_cast<std::size_t>(std::log2(static_cast<double>(n_features)));
  return std::clamp<std::size_t>(m, 1, n_features);
}

double gini_impurity(std::span<const double> class_weights) {
  const double total = std::accumulate(class_weights.begin(), class_weights.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double sq = 0.0;
  for (double w : class_weights) sq += w * w;
  return 1.0 - sq / (total * total);
}

namespace {

struct FeatureScan {
  double proxy;  // Σ wL_k²/wL + Σ wR_k²/wR, larger is better
  double threshold;
  double gain;
};

// Dense ranks of one feature column: equal values share a rank, order is preserved.
void dense_ranks(std::span<const double> column, std::span<std::uint32_t> ranks) {
  std::vector<std::uint32_t> order(column.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return column[a] < column[b]; });
  std::uint32_t rank = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && column[order[i - 1]] < column[order[i]]) ++rank;
    ranks[order[i]] = rank;
  }
}

// Feature-major rank table for a transposed matrix.
std::vector<std::uint32_t> rank_table(const Matrix& xt) {
  if (xt.cols() > std::numeric_limits<std::uint32_t>::max()) throw FitError("RF: too many training rows");
  std::vector<std::uint32_t> table(xt.rows() * xt.cols());
  for (std::size_t f = 0; f < xt.rows(); ++f) dense_ranks(xt.row(f), std::span(table).subspan(f * xt.cols(), xt.cols()));
  return table;
}

// Orders keys (rank << 32 | row). When rows were pushed in ascending order a
// stable radix sort on the rank alone gives the same order as sorting whole keys.
void sort_keys(std::vector<std::uint64_t>& keys, std::vector<std::uint64_t>& tmp, bool rows_ascending,
               std::uint32_t max_rank) {
  constexpr std::size_t kRadixMin = 256;
  if (!rows_ascending || keys.size() < kRadixMin) {
    std::sort(keys.begin(), keys.end());
    return;
  }
  tmp.resize(keys.size());
  for (unsigned shift = 32; shift < 64 && (max_rank >> (shift - 32)) != 0; shift += 8) {
    std::size_t count[257] = {};
    for (auto key : keys) ++count[((key >> shift) & 0xff) + 1];
    for (std::size_t b = 1; b < 257; ++b) count[b] += count[b - 1];
    for (auto key : keys) tmp[count[(key >> shift) & 0xff]++] = key;
    keys.swap(tmp);
  }
}

// Scans one feature. Rows are ordered by (rank, row), which matches ordering by (value, row).
// `sorted` is scratch space.
std::optional<FeatureScan> scan_feature(std::span<const double> column, std::span<const std::uint32_t> ranks,
                                        std::span<const Label> y, std::span<const double> weights,
                                        std::span<const std::size_t> rows, std::span<const double> parent,
                                        double parent_weight, double min_leaf_weight, bool rows_ascending,
                                        std::vector<std::uint64_t>& sorted, std::vector<std::uint64_t>& tmp,
                                        std::vector<double>& left, std::vector<double>& right, bool* constant) {
  sorted.clear();
  std::uint32_t max_rank = 0;
  for (auto r : rows) {
    sorted.push_back(std::uint64_t{ranks[r]} << 32 | r);
    max_rank = std::max(max_rank, ranks[r]);
  }
  sort_keys(sorted, tmp, rows_ascending, max_rank);
  *constant = (sorted.front() >> 32) == (sorted.back() >> 32);
  if (*constant) return std::nullopt;

  std::copy(parent.begin(), parent.end(), right.begin());
  std::fill(left.begin(), left.end(), 0.0);
  double sq_left = 0.0, sq_right = 0.0;
  for (double w : parent) sq_right += w * w;
  double w_left = 0.0, w_right = parent_weight;

  struct Cut {
    double proxy, threshold, sq_left, sq_right, w_left, w_right;
  };
  std::optional<Cut> best;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const std::size_t r = sorted[i] & 0xffffffffu;
    const Label c = y[r];
    const double w = weights[r];
    sq_left += 2.0 * left[c] * w + w * w;
    left[c] += w;
    sq_right += -2.0 * right[c] * w + w * w;
    right[c] -= w;
    w_left += w;
    w_right -= w;
    if ((sorted[i] >> 32) == (sorted[i + 1] >> 32)) continue;
    if (w_left < min_leaf_weight || w_right < min_leaf_weight || w_left <= 0.0 || w_right <= 0.0) continue;
    const double proxy = sq_left / w_left + sq_right / w_right;
    if (!best || proxy > best->proxy) {
      const double lo = column[r], hi = column[sorted[i + 1] & 0xffffffffu];
      double t = lo + (hi - lo) / 2.0;
      if (!(t < hi)) t = lo;
      best = Cut{proxy, t, sq_left, sq_right, w_left, w_right};
    }
  }
  if (!best) return std::nullopt;
  double sq_parent = 0.0;
  for (double v : parent) sq_parent += v * v;
  const double g_parent = 1.0 - sq_parent / (parent_weight * parent_weight);
  const double g_left = 1.0 - best->sq_left / (best->w_left * best->w_left);
  const double g_right = 1.0 - best->sq_right / (best->w_right * best->w_right);
  const double gain = g_parent - (best->w_left / parent_weight) * g_left - (best->w_right / parent_weight) * g_right;
  return FeatureScan{best->proxy, best->threshold, gain};
}

std::vector<double> class_totals(std::span<const Label> y, std::span<const double> weights,
                                 std::span<const std::size_t> rows, std::size_t n_classes, double* total) {
  std::vector<double> counts(n_classes, 0.0);
  *total = 0.0;
  for (auto r : rows) {
    counts[y[r]] += weights[r];
    *total += weights[r];
  }
  return counts;
}

}  // namespace

std::optional<SplitCandidate> best_gini_split(const Matrix& x, std::span<const Label> y,
                                              std::span<const double> weights, std::span<const std::size_t> rows,
                                              std::span<const std::size_t> features, std::size_t n_classes,
                                              double min_leaf_weight) {
  if (rows.size() < 2) return std::nullopt;
  double total = 0.0;
  const auto parent = class_totals(y, weights, rows, n_classes, &total);
  std::vector<std::uint64_t> sorted, tmp;
  const bool ascending = std::is_sorted(rows.begin(), rows.end());
  std::vector<double> left(n_classes), right(n_classes), column(x.rows());
  std::vector<std::uint32_t> ranks(x.rows());
  std::optional<SplitCandidate> best;
  double best_proxy = 0.0;
  for (auto f : features) {
    bool constant = false;
    for (std::size_t r = 0; r < x.rows(); ++r) column[r] = x(r, f);
    dense_ranks(column, ranks);
    const auto scan = scan_feature(column, ranks, y, weights, rows, parent, total, min_leaf_weight, ascending, sorted,
                                   tmp, left, right, &constant);
    if (scan && (!best || scan->proxy > best_proxy)) {
      best = SplitCandidate{f, scan->threshold, scan->gain};
      best_proxy = scan->proxy;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

std::span<const double> DecisionTree::leaf_distribution(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& node = nodes_[i];
    i = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return std::span(leaf_values_).subspan(nodes_[i].leaf, n_classes_);
}

class TreeBuilder {
 public:
  // xt is the transposed training matrix, so a feature column is a row.
  TreeBuilder(const Matrix& xt, std::span<const std::uint32_t> ranks, std::span<const Label> y, std::size_t n_classes,
              const ForestParams& params, std::uint64_t seed)
      : xt_(xt), ranks_(ranks), y_(y), n_classes_(n_classes), params_(params), rng_(seed), weights_(xt.cols(), 0.0) {}

  DecisionTree build() {
    const std::size_t n = xt_.cols();
    if (params_.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) weights_[rng_.below(n)] += 1.0;
    } else {
      std::fill(weights_.begin(), weights_.end(), 1.0);
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (weights_[i] > 0.0) rows.push_back(i);
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    min_leaf_weight_ = params_.min_weight_fraction_leaf * total;
    mtry_ = params_.features_per_split(xt_.rows());

    tree_.n_classes_ = n_classes_;
    tree_.nodes_.emplace_back();
    struct Task {
      std::vector<std::size_t> rows;
      std::uint32_t node;
      std::size_t depth;
    };
    std::vector<Task> stack;
    stack.push_back({std::move(rows), 0, 0});
    std::vector<std::size_t> feature_pool(xt_.rows());
    std::vector<double> left(n_classes_), right(n_classes_);
    std::vector<std::uint64_t> sorted, tmp;

    while (!stack.empty()) {
      Task task = std::move(stack.back());
      stack.pop_back();
      double w_total = 0.0;
      const auto counts = class_totals(y_, weights_, task.rows, n_classes_, &w_total);
      const std::size_t nonzero =
          static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }));
      const bool depth_capped = params_.max_depth > 0 && task.depth >= params_.max_depth;

      std::optional<FeatureScan> best;
      std::size_t best_feature = 0;
      if (nonzero > 1 && !depth_capped && task.rows.size() >= 2 && w_total >= 2.0 * min_leaf_weight_) {
        // Draw features without replacement until mtry non-constant ones were examined.
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
        std::size_t examined = 0;
        for (std::size_t k = 0; k < feature_pool.size() && examined < mtry_; ++k) {
          const auto j = k + static_cast<std::size_t>(rng_.below(feature_pool.size() - k));
          std::swap(feature_pool[k], feature_pool[j]);
          const std::size_t f = feature_pool[k];
          bool constant = false;
          // Row lists start ascending and partitioning keeps them so.
          const auto scan = scan_feature(xt_.row(f), ranks_.subspan(f * xt_.cols(), xt_.cols()), y_, weights_,
                                         task.rows, counts, w_total, min_leaf_weight_, true, sorted, tmp, left, right,
                                         &constant);
          if (constant) continue;
          ++examined;
          if (scan && (!best || scan->proxy > best->proxy)) {
            best = scan;
            best_feature = f;
          }
        }
      }

      auto& node = tree_.nodes_[task.node];
      if (!best) {
        node.feature = -1;
        node.leaf = static_cast<std::uint32_t>(tree_.leaf_values_.size());
        for (double c : counts) tree_.leaf_values_.push_back(c / w_total);
        continue;
      }
      std::vector<std::size_t> left_rows, right_rows;
      const auto column = xt_.row(best_feature);
      for (auto r : task.rows) (column[r] <= best->threshold ? left_rows : right_rows).push_back(r);
      const auto left_id = static_cast<std::uint32_t>(tree_.nodes_.size());
      node.feature = static_cast<std::int32_t>(best_feature);
      node.threshold = best->threshold;
      node.left = left_id;
      node.right = left_id + 1;
      tree_.nodes_.emplace_back();
      tree_.nodes_.emplace_back();
      // Right first so the left subtree is expanded first.
      stack.push_back({std::move(right_rows), left_id + 1, task.depth + 1});
      stack.push_back({std::move(left_rows), left_id, task.depth + 1});
    }
    return std::move(tree_);
  }

 private:
  const Matrix& xt_;
  std::span<const std::uint32_t> ranks_;
  std::span<const Label> y_;
  std::size_t n_classes_;
  const ForestParams& params_;
  Rng rng_;
  std::vector<double> weights_;
  double min_leaf_weight_ = 0.0;
  std::size_t mtry_ = 1;
  DecisionTree tree_;
};

ForestModel::ForestModel(ForestParams params, std::vector<DecisionTree> trees, std::size_t n_classes,
                         std::size_t n_features, bool timed_out)
    : FittedModel(params.to_hyperparams(), n_classes, n_features), params_(params), trees_(std::move(trees)) {
  if (timed_out) mark_timed_out();
}

Labels ForestModel::predict_rows(const Matrix& features) const {
  Labels out(features.rows());
  const std::size_t chunks = std::min<std::size_t>(features.rows(), 64);
  parallel_for(chunks, [&](std::size_t ch) {
    std::vector<std::size_t> votes(n_classes());
    std::vector<double> sums(n_classes());
    const std::size_t begin = features.rows() * ch / chunks, end = features.rows() * (ch + 1) / chunks;
    for (std::size_t i = begin; i < end; ++i) {
      std::fill(votes.begin(), votes.end(), 0);
      std::fill(sums.begin(), sums.end(), 0.0);
      for (const auto& tree : trees_) {
        const auto dist = tree.leaf_distribution(features.row(i));
        ++votes[argmax(dist)];
        for (std::size_t k = 0; k < dist.size(); ++k) sums[k] += dist[k];
      }
      out[i] = resolve_plurality(votes, sums);
    }
  });
  return out;
}

ForestModel fit_random_forest(const Matrix& x, std::span<const Label> y, std::size_t n_classes,
                              const ForestParams& params, const TrainOptions& opts) {
  check_training_data(x, y, n_classes);
  opts.validate();
  if (params.n_estimators < 1) throw FitError("n_estimators must be at least 1");
  Deadline deadline(opts.timeout);
  const Matrix xt = transpose(x);
  const auto ranks = rank_table(xt);
  std::vector<std::optional<DecisionTree>> grown(params.n_estimators);
  parallel_for(params.n_estimators, [&](std::size_t t) {
    if (t > 0 && deadline.expired()) return;
    grown[t] = TreeBuilder(xt, ranks, y, n_classes, params, derive_seed(opts.seed, {t})).build();
  });
  std::vector<DecisionTree> trees;
  for (auto& t : grown)
    if (t) trees.push_back(std::move(*t));
  const bool timed_out = trees.size() < params.n_estimators;
  return ForestModel(params, std::move(trees), n_classes, x.cols(), timed_out);
}

}  // namespace dgold
