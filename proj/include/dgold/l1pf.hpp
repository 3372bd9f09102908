#pragma once

// Level-1 prediction files (L1PF v1) and label files.
//
// L1PF v1, all integers little-endian:
//   bytes 0-3  magic "DGL1"
//   byte  4    version 0x01
//   bytes 5-8  u32 header_length
//   header     UTF-8 JSON object: model_name, dataset_name, split ("train"|"test"),
//              n_samples, n_classes, score_kind ("logits"|"probs"),
//              optional solo_test_accuracy
//   payload    n_samples x n_classes float32, row-major
//
// Label file v1: magic "DGLB", version 0x01, u32 header_length, JSON header
// with dataset_name, split, n_samples, n_classes; payload n_samples x u32.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "dgold/matrix.hpp"

namespace dgold {

enum class Split { train, test };
enum class ScoreKind { logits, probs };

std::string_view to_string(Split s) noexcept;
std::string_view to_string(ScoreKind k) noexcept;
Split parse_split(std::string_view s);
ScoreKind parse_score_kind(std::string_view s);

inline constexpr std::array<char, 4> kBlockMagic{'D', 'G', 'L', '1'};
inline constexpr std::array<char, 4> kLabelMagic{'D', 'G', 'L', 'B'};
inline constexpr unsigned char kFormatVersion = 0x01;
inline constexpr std::uint32_t kMaxHeaderLength = 1u << 20;
inline constexpr double kProbRowTolerance = 1e-4;

/// One model's class scores over one split.
struct PredictionBlock {
  std::string model_name;
  std::string dataset_name;
  Split split = Split::train;
  ScoreKind score_kind = ScoreKind::logits;
  Matrix scores;  // n_samples x n_classes
  std::optional<double> solo_test_accuracy;

  std::size_t n_samples() const noexcept { return scores.rows(); }
  std::size_t n_classes() const noexcept { return scores.cols(); }

  bool operator==(const PredictionBlock&) const = default;
};

struct LabelVector {
  std::string dataset_name;
  Split split = Split::train;
  std::size_t n_classes = 0;
  Labels labels;

  std::size_t n_samples() const noexcept { return labels.size(); }

  bool operator==(const LabelVector&) const = default;
};

struct DatasetMeta {
  std::string_view name;
  std::size_t n_classes;
  std::size_t n_train;
  std::size_t n_test;
};

inline constexpr std::array<DatasetMeta, 4> kDatasets{{
    {"fashion_mnist", 10, 60'000, 10'000},
    {"cifar10", 10, 50'000, 10'000},
    {"cifar100", 100, 50'000, 10'000},
    {"tiny_imagenet", 200, 100'000, 10'000},
}};

std::optional<DatasetMeta> find_dataset(std::string_view name) noexcept;

/// Checks every PredictionBlock invariant; throws FormatError (or
/// ProbabilityRowError) on the first violation.
void validate(const PredictionBlock& block);
void validate(const LabelVector& labels);

/// Serialized header JSON, exactly as written to disk.
std::string block_header_json(const PredictionBlock& block);
std::string label_header_json(const LabelVector& labels);

/// Writes the block; returns the number of bytes emitted. Scores are
/// narrowed to float32.
std::size_t write_block(const PredictionBlock& block, std::ostream& out);
PredictionBlock read_block(std::istream& in);

std::size_t write_labels(const LabelVector& labels, std::ostream& out);
LabelVector read_labels(std::istream& in);

// File wrappers; I/O failures raise IoError naming the path, format
// problems raise FormatError prefixed with the path.
std::size_t write_block_file(const PredictionBlock& block, const std::filesystem::path& path);
PredictionBlock read_block_file(const std::filesystem::path& path);
std::size_t write_labels_file(const LabelVector& labels, const std::filesystem::path& path);
LabelVector read_labels_file(const std::filesystem::path& path);

/// Rounds every score to the nearest float32, i.e. what a write/read cycle yields.
Matrix round_to_float32(const Matrix& m);

}  // namespace dgold
