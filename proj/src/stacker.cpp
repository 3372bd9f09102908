#include "dgold/stacker.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "dgold/error.hpp"
#include "dgold/random.hpp"

namespace dgold {

EnsembleSpec select_ensemble(std::span<const std::string> available, std::size_t size, std::uint64_t seed) {
  if (available.empty()) throw SelectionError("no models available for ensemble selection");
  std::vector<std::string> pool(available.begin(), available.end());
  std::sort(pool.begin(), pool.end());
  if (std::adjacent_find(pool.begin(), pool.end()) != pool.end()) {
    throw SelectionError("duplicate model name '" + *std::adjacent_find(pool.begin(), pool.end()) + "'");
  }
  if (size == 0) throw SelectionError("ensemble size must be at least 1");
  if (size > pool.size()) {
    throw SelectionError("ensemble size " + std::to_string(size) + " exceeds the " + std::to_string(pool.size()) +
                         " available models");
  }
  // Partial Fisher-Yates: position k receives a uniform draw from the tail.
  Rng rng(seed);
  for (std::size_t k = 0; k < size; ++k) {
    const auto j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
    std::swap(pool[k], pool[j]);
  }
  pool.resize(size);
  return EnsembleSpec{size, std::move(pool), seed};
}

namespace {

void check_aligned(std::span<const PredictionBlock> blocks, const LabelVector& labels) {
  const auto& ref = blocks.front();
  for (const auto& b : blocks) {
    std::string why;
    if (b.dataset_name != ref.dataset_name) why = "dataset '" + b.dataset_name + "' != '" + ref.dataset_name + "'";
    else if (b.split != ref.split) why = "split " + std::string(to_string(b.split)) + " != " + std::string(to_string(ref.split));
    else if (b.n_samples() != ref.n_samples()) why = std::to_string(b.n_samples()) + " samples != " + std::to_string(ref.n_samples());
    else if (b.n_classes() != ref.n_classes()) why = std::to_string(b.n_classes()) + " classes != " + std::to_string(ref.n_classes());
    else if (b.n_samples() != labels.n_samples()) why = std::to_string(b.n_samples()) + " samples but labels have " + std::to_string(labels.n_samples());
    else if (b.split != labels.split) why = "block split " + std::string(to_string(b.split)) + " but labels are " + std::string(to_string(labels.split));
    else if (b.n_classes() != labels.n_classes) why = std::to_string(b.n_classes()) + " classes but labels declare " + std::to_string(labels.n_classes);
    else if (b.dataset_name != labels.dataset_name) why = "dataset '" + b.dataset_name + "' but labels are for '" + labels.dataset_name + "'";
    if (!why.empty()) throw AssemblyError("block '" + b.model_name + "': " + why);
  }
}

}  // namespace

StackedDataset build_stacked_dataset(std::span<const PredictionBlock> blocks, const LabelVector& labels) {
  if (blocks.empty()) throw AssemblyError("cannot stack an empty block list");
  check_aligned(blocks, labels);
  const std::size_t n = blocks.front().n_samples();
  const std::size_t c = blocks.front().n_classes();

  StackedDataset ds;
  ds.split = blocks.front().split;
  ds.labels = labels;
  ds.features = Matrix(n, c * blocks.size());
  ds.feature_layout.reserve(c * blocks.size());
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    for (std::size_t k = 0; k < c; ++k) ds.feature_layout.push_back({blocks[m].model_name, k});
    for (std::size_t i = 0; i < n; ++i) {
      auto src = blocks[m].scores.row(i);
      std::copy(src.begin(), src.end(), ds.features.row(i).begin() + static_cast<std::ptrdiff_t>(m * c));
    }
  }
  return ds;
}

PredictionBlock to_probabilities(const PredictionBlock& block) {
  if (block.score_kind == ScoreKind::probs) return block;
  PredictionBlock out = block;
  out.scores = softmax_rows(block.scores);
  out.score_kind = ScoreKind::probs;
  return out;
}

Label resolve_plurality(std::span<const std::size_t> votes, std::span<const double> score_sums) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < votes.size(); ++k) {
    if (votes[k] > votes[best] || (votes[k] == votes[best] && score_sums[k] > score_sums[best])) best = k;
  }
  return static_cast<Label>(best);
}

double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("accuracy: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

VoteResult majority_vote(std::span<const PredictionBlock> blocks, const LabelVector& labels) {
  if (blocks.empty()) throw VoteError("majority vote needs at least one model");
  check_aligned(blocks, labels);
  const std::size_t n = blocks.front().n_samples();
  const std::size_t c = blocks.front().n_classes();

  VoteResult result;
  result.predictions.resize(n);
  std::vector<std::size_t> votes(c);
  std::vector<double> sums(c);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    std::fill(sums.begin(), sums.end(), 0.0);
    for (const auto& b : blocks) {
      auto row = b.scores.row(i);
      ++votes[argmax(row)];
      for (std::size_t k = 0; k < c; ++k) sums[k] += row[k];
    }
    result.predictions[i] = resolve_plurality(votes, sums);
  }
  result.accuracy = accuracy(result.predictions, labels.labels);
  return result;
}

std::size_t closest_power_of_two(std::size_t n) {
  if (n <= 1) return 1;
  const std::size_t lo = std::bit_floor(n);
  if (lo == n) return n;
  if (lo > (std::numeric_limits<std::size_t>::max() >> 1)) return lo;
  const std::size_t hi = lo << 1;
  return (n - lo <= hi - n) ? lo : hi;
}

FblHeadPlan fbl_head_plan(std::size_t in_features, std::size_t n_classes) {
  FblHeadPlan plan;
  plan.out_classes = n_classes;
  for (std::size_t w = closest_power_of_two(in_features); w > n_classes; w /= 2) plan.hidden_widths.push_back(w);
  return plan;
}

// ---------------------------------------------------------------------------
// Stacked CSV

namespace {

std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError(std::string("stacked csv: bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void write_stacked_csv(const StackedDataset& ds, std::ostream& out) {
  if (ds.feature_layout.size() != ds.n_features()) throw FormatError("stacked csv: layout/feature count mismatch");
  if (ds.labels.n_samples() != ds.n_samples()) throw FormatError("stacked csv: label/feature row mismatch");
  if (ds.labels.dataset_name.find_first_of(" \n,") != std::string::npos) {
    throw FormatError("stacked csv: dataset name must not contain spaces, commas or newlines");
  }
  out << "# dgold-stacked v1 dataset=" << ds.labels.dataset_name << " split=" << to_string(ds.split)
      << " n_classes=" << ds.n_classes() << '\n';
  out << "label";
  for (const auto& col : ds.feature_layout) {
    if (col.model_name.find_first_of(",\n") != std::string::npos) {
      throw FormatError("stacked csv: model name '" + col.model_name + "' contains a comma or newline");
    }
    out << ',' << col.model_name << ':' << col.class_index;
  }
  out << '\n';
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    out << ds.labels.labels[i];
    for (double v : ds.features.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("stacked csv: write failed");
}

StackedDataset read_stacked_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# dgold-stacked v1 ")) {
    throw FormatError("not a dgold stacked csv file");
  }
  StackedDataset ds;
  {
    std::istringstream meta(line.substr(19));
    std::string kv;
    bool have_split = false, have_classes = false;
    while (meta >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw FormatError("stacked csv: malformed metadata '" + kv + "'");
      const auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (key == "dataset") ds.labels.dataset_name = value;
      else if (key == "split") { ds.split = parse_split(value); have_split = true; }
      else if (key == "n_classes") { ds.labels.n_classes = parse_number<std::size_t>(value, "n_classes"); have_classes = true; }
    }
    if (!have_split || !have_classes || ds.labels.dataset_name.empty()) {
      throw FormatError("stacked csv: metadata needs dataset, split and n_classes");
    }
    ds.labels.split = ds.split;
  }
  if (!std::getline(in, line)) throw FormatError("stacked csv: missing column header");
  const auto header = split_fields(line);
  if (header.empty() || header.front() != "label") throw FormatError("stacked csv: first column must be 'label'");
  for (std::size_t j = 1; j < header.size(); ++j) {
    const auto colon = header[j].rfind(':');
    if (colon == std::string_view::npos) throw FormatError("stacked csv: bad column '" + std::string(header[j]) + "'");
    ds.feature_layout.push_back(
        {std::string(header[j].substr(0, colon)), parse_number<std::size_t>(header[j].substr(colon + 1), "class index")});
  }
  const std::size_t p = ds.feature_layout.size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != p + 1) {
      throw FormatError("stacked csv: row " + std::to_string(rows) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(p + 1));
    }
    ds.labels.labels.push_back(parse_number<Label>(fields[0], "label"));
    for (std::size_t j = 1; j <= p; ++j) values.push_back(parse_number<double>(fields[j], "value"));
    ++rows;
  }
  ds.features = Matrix(rows, p, std::move(values));
  validate(ds.labels);
  return ds;
}

void write_stacked_csv_file(const StackedDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_stacked_csv(ds, out);
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

StackedDataset read_stacked_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_stacked_csv(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace dgold
