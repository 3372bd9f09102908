#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dgold/matrix.hpp"

namespace dgold {

/// The seven built-in level-2 learners, tagged as in the result tables.
enum class Algorithm { SG, PA, RG, LR, KN, RF, MP };

inline constexpr std::array<Algorithm, 7> kAllAlgorithms{Algorithm::SG, Algorithm::PA, Algorithm::RG, Algorithm::LR,
                                                         Algorithm::KN, Algorithm::RF, Algorithm::MP};

std::string_view algorithm_tag(Algorithm a) noexcept;
/// Accepts the two-letter tag (case-insensitive). Throws ConfigError otherwise.
Algorithm parse_algorithm(std::string_view tag);

using HyperValue = std::variant<bool, std::int64_t, double, std::string>;
using Hyperparams = std::map<std::string, HyperValue>;

std::string to_string(const HyperValue& v);

struct TrainOptions {
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_epochs;  // unset: the learner's own default
  double tolerance = 1e-4;
  std::optional<std::chrono::duration<double>> timeout;

  /// Throws FitError unless max_epochs >= 1 (when set) and tolerance > 0.
  void validate() const;
  std::size_t epochs_or(std::size_t fallback) const { return max_epochs.value_or(fallback); }
};

/// Wall-clock budget started at construction.
class Deadline {
 public:
  explicit Deadline(std::optional<std::chrono::duration<double>> budget)
      : start_(std::chrono::steady_clock::now()), budget_(budget) {}
  bool expired() const {
    return budget_ && std::chrono::steady_clock::now() - start_ >= *budget_;
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::optional<std::chrono::duration<double>> budget_;
};

/// A trained level-2 learner. Immutable after fit; predict is reentrant.
class FittedModel {
 public:
  virtual ~FittedModel() = default;

  virtual Algorithm algorithm() const noexcept = 0;

  const Hyperparams& hyperparams() const noexcept { return hyperparams_; }
  std::size_t n_classes() const noexcept { return n_classes_; }
  std::size_t n_features() const noexcept { return n_features_; }

  /// True when training stopped at the time budget; the model is the best so far.
  bool timed_out() const noexcept { return timed_out_; }

  /// Throws ShapeError unless features.cols() == n_features().
  Labels predict(const Matrix& features) const;

 protected:
  FittedModel(Hyperparams hp, std::size_t n_classes, std::size_t n_features)
      : hyperparams_(std::move(hp)), n_classes_(n_classes), n_features_(n_features) {}

  virtual Labels predict_rows(const Matrix& features) const = 0;

  void mark_timed_out() noexcept { timed_out_ = true; }

 private:
  Hyperparams hyperparams_;
  std::size_t n_classes_;
  std::size_t n_features_;
  bool timed_out_ = false;
};

/// Rejects empty data, a label/row count mismatch, labels >= n_classes and
/// non-finite features, raising FitError.
void check_training_data(const Matrix& x, std::span<const Label> y, std::size_t n_classes);

// Typed accessors for Hyperparams. Throw FitError on a type mismatch.
double hp_real(const Hyperparams& hp, const std::string& key, double fallback);
std::int64_t hp_int(const Hyperparams& hp, const std::string& key, std::int64_t fallback);
bool hp_bool(const Hyperparams& hp, const std::string& key, bool fallback);
std::string hp_string(const Hyperparams& hp, const std::string& key, const std::string& fallback);

/// Throws FitError if hp holds a key outside `known`.
void hp_check_keys(const Hyperparams& hp, std::span<const std::string_view> known, std::string_view learner);

}  // namespace dgold
