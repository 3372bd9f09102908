#pragma once

// Random-search hyperparameter tuning over fixed per-learner spaces.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dgold/classifiers.hpp"
#include "dgold/stacker.hpp"

namespace dgold {

enum class ParamKind { real_uniform, real_log_uniform, int_uniform, categorical };
std::string_view to_string(ParamKind k) noexcept;

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::real_uniform;
  double low = 0.0, high = 0.0;      // inclusive bounds for the numeric kinds
  std::vector<HyperValue> choices;  // categorical only

  bool contains(const HyperValue& v) const;
};

struct HyperparamSpace {
  Algorithm algorithm = Algorithm::RG;
  std::vector<ParamSpec> entries;

  /// Throws ConfigError unless low < high (low > 0 for log kinds) and every
  /// categorical has at least one choice.
  void validate() const;
  /// True when every entry is present in hp with an in-range value.
  bool contains(const Hyperparams& hp) const;
};

/// The tuning space of each built-in learner.
HyperparamSpace builtin_space(Algorithm algorithm);

/// Draw for one trial. Log kinds are uniform in log10 space; the result
/// depends only on (space, seed, trial).
Hyperparams sample(const HyperparamSpace& space, std::uint64_t seed, std::size_t trial);

struct TrialResult {
  std::size_t trial_index = 0;
  Hyperparams sampled;
  double validation_accuracy = 0.0;  // 0 for failed or timed-out trials
  double fit_seconds = 0.0;
  bool failed = false;
  bool timed_out = false;
  std::string error;
};

struct SearchOptions {
  std::size_t n_trials = 50;
  std::uint64_t seed = 0;
  double val_fraction = 0.2;
  std::optional<std::size_t> max_epochs;
  std::optional<std::chrono::duration<double>> timeout;  // per trial fit
};

struct SearchResult {
  TrialResult best;
  std::vector<TrialResult> trials;      // ordered by trial_index
  std::unique_ptr<FittedModel> model;  // best configuration refit on all of `train`
  bool refit_timed_out = false;
};

/// Per-class shuffle and split; each class keeps at least one training row.
/// Returns (fit rows, validation rows), each ascending. Throws ConfigError
/// if the validation side would be empty.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(std::span<const Label> labels,
                                                                               std::size_t n_classes,
                                                                               double val_fraction,
                                                                               std::uint64_t seed);

/// Runs n_trials sampled configurations on a stratified holdout of `train`
/// and refits the best (ties: lowest trial index) on all of it. Errors and
/// timeouts inside a trial score 0 and the search continues.
SearchResult search(const StackedDataset& train, Algorithm algorithm, const SearchOptions& opts);
SearchResult search(const StackedDataset& train, const HyperparamSpace& space, const SearchOptions& opts);

/// Trial log as JSON. Timing fields are omitted unless include_timing.
std::string trial_log_json(const SearchResult& result, Algorithm algorithm, bool include_timing);

}  // namespace dgold
