#pragma once

// Level 1 of the two-level pipeline: pick an ensemble, concatenate its score
// blocks into a level-2 dataset, and the majority-vote baseline. Also the
// head-sizing rule used when rebuilding a pretrained network's classifier.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dgold/l1pf.hpp"
#include "dgold/matrix.hpp"

namespace dgold {

inline constexpr std::size_t kDefaultEnsembleSizes[] = {3, 7, 11};

struct EnsembleSpec {
  std::size_t size = 0;
  std::vector<std::string> model_names;  // distinct, in draw order
  std::uint64_t seed = 0;

  bool operator==(const EnsembleSpec&) const = default;
};

struct FeatureColumn {
  std::string model_name;
  std::size_t class_index = 0;

  bool operator==(const FeatureColumn&) const = default;
};

/// Level-2 design matrix plus targets. The target is kept out of `features`;
/// counting it as a column gives features.cols() + 1.
struct StackedDataset {
  Matrix features;  // N x (M*C)
  LabelVector labels;
  std::vector<FeatureColumn> feature_layout;
  Split split = Split::train;

  std::size_t n_samples() const noexcept { return features.rows(); }
  std::size_t n_features() const noexcept { return features.cols(); }
  std::size_t n_classes() const noexcept { return labels.n_classes; }

  bool operator==(const StackedDataset&) const = default;
};

/// Hidden widths of an FC/batchnorm/leaky-ReLU head, then a final linear
/// layer to out_classes.
struct FblHeadPlan {
  std::vector<std::size_t> hidden_widths;
  std::size_t out_classes = 0;

  bool operator==(const FblHeadPlan&) const = default;
};

struct VoteResult {
  Labels predictions;
  double accuracy = 0.0;
};

/// Uniform draw of `size` names without replacement. The candidates are
/// sorted first, so the result depends only on the set of names and the
/// seed, never on listing order. Throws SelectionError on duplicates, an
/// empty pool, size 0, or size > pool.
EnsembleSpec select_ensemble(std::span<const std::string> available, std::size_t size, std::uint64_t seed);

/// Horizontal concatenation of the blocks' scores, in the given order.
/// Throws AssemblyError naming the first block that disagrees with the
/// first one (dataset, split, n_samples, n_classes) or with the labels.
StackedDataset build_stacked_dataset(std::span<const PredictionBlock> blocks, const LabelVector& labels);

/// Copy of a block with logits turned into softmax probabilities. Blocks
/// already holding probabilities are returned unchanged.
PredictionBlock to_probabilities(const PredictionBlock& block);

/// Plurality winner: most votes, then highest summed score among the tied
/// classes, then lowest class index.
Label resolve_plurality(std::span<const std::size_t> votes, std::span<const double> score_sums);

/// Per sample, each block votes its argmax; the plurality rule above
/// decides. Throws VoteError for an empty ensemble and AssemblyError for
/// misaligned inputs.
VoteResult majority_vote(std::span<const PredictionBlock> blocks, const LabelVector& labels);

/// Power of two nearest to n; an exact midpoint goes to the lower power.
std::size_t closest_power_of_two(std::size_t n);

/// Head widths: start at the power of two closest to in_features and halve
/// while the width stays above n_classes.
FblHeadPlan fbl_head_plan(std::size_t in_features, std::size_t n_classes);

double accuracy(std::span<const Label> predicted, std::span<const Label> truth);

// Stacked-dataset text files (also the external-learner exchange format):
//   # dgold-stacked v1 dataset=<name> split=<train|test> n_classes=<C>
//   label,<model>:<class>,...
//   <label>,<score>,...
void write_stacked_csv(const StackedDataset& ds, std::ostream& out);
StackedDataset read_stacked_csv(std::istream& in);
void write_stacked_csv_file(const StackedDataset& ds, const std::filesystem::path& path);
StackedDataset read_stacked_csv_file(const std::filesystem::path& path);

}  // namespace dgold
