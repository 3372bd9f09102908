#pragma once

// Experiment driver: repeated random ensembles, Net / Maj / ML comparison
// and the reports.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgold/classifiers.hpp"
#include "dgold/l1pf.hpp"

namespace dgold {

struct ExperimentConfig {
  std::filesystem::path block_directory;
  std::filesystem::path label_directory;  // empty: same as block_directory
  std::string dataset_name;               // empty: the single dataset found
  std::vector<std::size_t> ensemble_sizes{3, 7, 11};
  std::size_t repetitions = 10;
  std::vector<Algorithm> algorithms{kAllAlgorithms.begin(), kAllAlgorithms.end()};
  bool tune = false;
  std::size_t trials = 50;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  std::optional<std::chrono::duration<double>> timeout;  // per algorithm fit
  std::optional<std::size_t> max_epochs;
  bool softmax_features = false;

  /// Throws ConfigError for empty sizes, a zero size or repetition count,
  /// duplicate algorithms, zero trials when tuning or a bad val_fraction.
  void validate() const;
};

/// Level-1 material for one dataset: both splits of every model, in the
/// same model order, plus the two label vectors.
struct ExperimentInputs {
  std::vector<PredictionBlock> train_blocks;
  std::vector<PredictionBlock> test_blocks;
  LabelVector train_labels;
  LabelVector test_labels;

  /// Throws ConfigError unless every model has both splits, names are
  /// unique, and everything agrees with the label vectors.
  void validate() const;
  std::vector<std::string> model_names() const;
};

/// Scans the directories for L1PF block and label files (by magic, any
/// file name). Throws ConfigError for missing or duplicate material.
ExperimentInputs load_inputs(const std::filesystem::path& block_dir, const std::filesystem::path& label_dir,
                             const std::string& dataset_name);

enum class Winner { Net, Maj, ML };
std::string_view to_string(Winner w) noexcept;
Winner parse_winner(std::string_view s);

struct AlgorithmScore {
  Algorithm algorithm = Algorithm::RG;
  double accuracy = 0.0;
  bool timed_out = false;
  bool failed = false;
  std::string error;
  Hyperparams hyperparams;  // the configuration that was scored

  bool valid() const noexcept { return !timed_out && !failed; }
  bool operator==(const AlgorithmScore&) const = default;
};

struct BestMl {
  double score = 0.0;
  Algorithm algorithm = Algorithm::RG;
  bool operator==(const BestMl&) const = default;
};

/// One (size, repetition) cell.
struct CellResult {
  std::size_t size = 0;
  std::size_t repetition = 0;  // 1-based
  std::vector<std::string> models;
  double net_score = 0.0;
  double maj_score = 0.0;
  std::vector<AlgorithmScore> ml_scores;  // config algorithm order
  std::optional<BestMl> best_ml;          // over valid scores; ties go to the earlier algorithm
  Winner winner = Winner::Net;

  bool operator==(const CellResult&) const = default;
};

struct ExperimentReport {
  std::string dataset_name;
  std::uint64_t seed = 0;
  bool tuned = false;
  std::vector<Algorithm> algorithms;
  std::vector<CellResult> cells;  // sizes in config order, repetitions ascending
  std::size_t wins_net = 0, wins_maj = 0, wins_ml = 0;

  bool operator==(const ExperimentReport&) const = default;
};

/// Highest of the three scores; ties go ML, then Maj, then Net.
Winner decide_winner(double net, double maj, const std::optional<BestMl>& best_ml);

/// Runs the whole protocol. Every input problem is reported before any
/// training starts.
ExperimentReport run_experiment(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config, const ExperimentInputs& inputs);

enum class ReportFormat { text, csv, json };
ReportFormat parse_report_format(std::string_view s);

std::string emit_report(const ExperimentReport& report, ReportFormat format);
/// Inverse of the JSON form. Throws FormatError on malformed input.
ExperimentReport parse_report_json(const std::string& json);

}  // namespace dgold
