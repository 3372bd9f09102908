#include "dgold/l1pf.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgold/error.hpp"

namespace dgold {

using nlohmann::json;

namespace {

constexpr std::size_t kPreambleBytes = 4 + 1 + 4;
constexpr std::size_t kChunkBytes = 1 << 20;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_preamble(std::ostream& out, const std::array<char, 4>& magic, const std::string& header) {
  if (header.size() > kMaxHeaderLength) throw FormatError("header exceeds maximum length");
  out.write(magic.data(), 4);
  out.put(static_cast<char>(kFormatVersion));
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
}

// Reads magic, version and the JSON header. `what` names the file kind for messages.
json read_preamble(std::istream& in, const std::array<char, 4>& magic, const char* what) {
  unsigned char pre[kPreambleBytes];
  in.read(reinterpret_cast<char*>(pre), kPreambleBytes);
  if (in.gcount() < 4 || !std::equal(magic.begin(), magic.end(), reinterpret_cast<const char*>(pre))) {
    throw FormatError(std::string("not an ") + what + " file");
  }
  if (in.gcount() < static_cast<std::streamsize>(kPreambleBytes)) throw FormatError("truncated preamble");
  if (pre[4] != kFormatVersion) {
    throw FormatError("unsupported version " + std::to_string(pre[4]));
  }
  const std::uint32_t header_length = get_u32(pre + 5);
  if (header_length > kMaxHeaderLength) throw FormatError("header length exceeds maximum");
  std::string header(header_length, '\0');
  in.read(header.data(), header_length);
  if (static_cast<std::uint32_t>(in.gcount()) != header_length) throw FormatError("truncated header");
  json j = json::parse(header, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("header is not a JSON object");
  return j;
}

void require_keys(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
  for (const char* k : required)
    if (!j.contains(k)) throw FormatError(std::string("header missing key '") + k + "'");
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(required.begin(), required.end(), [&](const char* k) { return key == k; }) ||
                       std::any_of(optional.begin(), optional.end(), [&](const char* k) { return key == k; });
    if (!known) throw FormatError("header has unknown key '" + key + "'");
  }
}

std::string get_name(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw FormatError(std::string("header key '") + key + "' must be a string");
  auto s = v.get<std::string>();
  if (s.empty()) throw FormatError(std::string("header key '") + key + "' must be non-empty");
  return s;
}

std::size_t get_count(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_unsigned()) throw FormatError(std::string("header key '") + key + "' must be an unsigned integer");
  const auto n = v.get<std::uint64_t>();
  if (n == 0) throw FormatError(std::string("header key '") + key + "' must be positive");
  if (n > (std::uint64_t{1} << 40)) throw FormatError(std::string("header key '") + key + "' is implausibly large");
  return static_cast<std::size_t>(n);
}

// Reads exactly `bytes` bytes in bounded chunks, so a corrupted header cannot
// trigger a huge allocation before the truncation is noticed.
std::vector<unsigned char> read_payload(std::istream& in, std::size_t bytes) {
  std::vector<unsigned char> buf;
  buf.reserve(std::min(bytes, kChunkBytes));
  while (buf.size() < bytes) {
    const std::size_t want = std::min(kChunkBytes, bytes - buf.size());
    const std::size_t at = buf.size();
    buf.resize(at + want);
    in.read(reinterpret_cast<char*>(buf.data() + at), static_cast<std::streamsize>(want));
    if (static_cast<std::size_t>(in.gcount()) != want) throw FormatError("truncated payload");
  }
  return buf;
}

void require_eof(std::istream& in) {
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after payload");
}

void check_probability_rows(const Matrix& scores) {
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    double sum = 0.0;
    bool in_range = true;
    for (double v : scores.row(i)) {
      sum += v;
      in_range = in_range && v >= 0.0 && v <= 1.0;
    }
    if (!in_range || std::abs(sum - 1.0) > kProbRowTolerance) {
      throw ProbabilityRowError("invalid probability rows (first bad row " + std::to_string(i) + ")", i);
    }
  }
}

template <typename Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError&) {
    throw;
  } catch (const ProbabilityRowError& e) {
    throw ProbabilityRowError(path.string() + ": " + e.what(), e.row());
  } catch (const LabelRangeError& e) {
    throw LabelRangeError(path.string() + ": " + e.what(), e.row());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string_view to_string(Split s) noexcept { return s == Split::train ? "train" : "test"; }
std::string_view to_string(ScoreKind k) noexcept { return k == ScoreKind::logits ? "logits" : "probs"; }

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw FormatError("split must be \"train\" or \"test\", got \"" + std::string(s) + "\"");
}

ScoreKind parse_score_kind(std::string_view s) {
  if (s == "logits") return ScoreKind::logits;
  if (s == "probs") return ScoreKind::probs;
  throw FormatError("score_kind must be \"logits\" or \"probs\", got \"" + std::string(s) + "\"");
}

std::optional<DatasetMeta> find_dataset(std::string_view name) noexcept {
  for (const auto& d : kDatasets)
    if (d.name == name) return d;
  return std::nullopt;
}

void validate(const PredictionBlock& block) {
  if (block.model_name.empty()) throw FormatError("model_name must be non-empty");
  if (block.dataset_name.empty()) throw FormatError("dataset_name must be non-empty");
  if (block.n_samples() == 0 || block.n_classes() == 0) throw FormatError("block must have at least one score");
  if (!block.scores.all_finite()) throw FormatError("scores must be finite");
  if (block.solo_test_accuracy) {
    const double a = *block.solo_test_accuracy;
    if (!(a >= 0.0 && a <= 1.0)) throw FormatError("solo_test_accuracy must lie in [0, 1]");
  }
  if (block.score_kind == ScoreKind::probs) check_probability_rows(block.scores);
}

void validate(const LabelVector& lv) {
  if (lv.dataset_name.empty()) throw FormatError("dataset_name must be non-empty");
  if (lv.n_classes == 0) throw FormatError("n_classes must be positive");
  if (lv.labels.empty()) throw FormatError("label vector must be non-empty");
  for (std::size_t i = 0; i < lv.labels.size(); ++i) {
    if (lv.labels[i] >= lv.n_classes) {
      throw LabelRangeError("label exceeds n_classes at row " + std::to_string(i), i);
    }
  }
}

std::string block_header_json(const PredictionBlock& block) {
  json h;
  h["model_name"] = block.model_name;
  h["dataset_name"] = block.dataset_name;
  h["split"] = to_string(block.split);
  h["n_samples"] = block.n_samples();
  h["n_classes"] = block.n_classes();
  h["score_kind"] = to_string(block.score_kind);
  if (block.solo_test_accuracy) h["solo_test_accuracy"] = *block.solo_test_accuracy;
  return h.dump();
}

std::string label_header_json(const LabelVector& lv) {
  json h;
  h["dataset_name"] = lv.dataset_name;
  h["split"] = to_string(lv.split);
  h["n_samples"] = lv.n_samples();
  h["n_classes"] = lv.n_classes;
  return h.dump();
}

std::size_t write_block(const PredictionBlock& block, std::ostream& out) {
  validate(block);
  const std::string header = block_header_json(block);
  const auto values = block.scores.data();
  std::vector<char> payload(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = static_cast<float>(values[i]);
    if (!std::isfinite(f)) throw FormatError("score overflows float32 at flat index " + std::to_string(i));
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) payload[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  write_preamble(out, kBlockMagic, header);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed");
  return kPreambleBytes + header.size() + payload.size();
}

PredictionBlock read_block(std::istream& in) {
  const json h = read_preamble(in, kBlockMagic, "L1PF");
  require_keys(h, {"model_name", "dataset_name", "split", "n_samples", "n_classes", "score_kind"},
               {"solo_test_accuracy"});
  PredictionBlock block;
  block.model_name = get_name(h, "model_name");
  block.dataset_name = get_name(h, "dataset_name");
  if (!h["split"].is_string()) throw FormatError("split must be a string");
  block.split = parse_split(h["split"].get<std::string>());
  if (!h["score_kind"].is_string()) throw FormatError("score_kind must be a string");
  block.score_kind = parse_score_kind(h["score_kind"].get<std::string>());
  const std::size_t n = get_count(h, "n_samples");
  const std::size_t c = get_count(h, "n_classes");
  if (h.contains("solo_test_accuracy")) {
    const auto& a = h["solo_test_accuracy"];
    if (!a.is_number()) throw FormatError("solo_test_accuracy must be a number");
    block.solo_test_accuracy = a.get<double>();
  }
  if (n > (std::numeric_limits<std::size_t>::max() / 4) / c) throw FormatError("payload size overflows");

  const auto payload = read_payload(in, n * c * 4);
  require_eof(in);
  std::vector<double> values(n * c);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = std::bit_cast<float>(get_u32(payload.data() + 4 * i));
    if (!std::isfinite(f)) throw FormatError("non-finite score at flat index " + std::to_string(i));
    values[i] = f;
  }
  block.scores = Matrix(n, c, std::move(values));
  validate(block);
  return block;
}

std::size_t write_labels(const LabelVector& lv, std::ostream& out) {
  validate(lv);
  const std::string header = label_header_json(lv);
  write_preamble(out, kLabelMagic, header);
  for (Label l : lv.labels) put_u32(out, l);
  if (!out) throw IoError("write failed");
  return kPreambleBytes + header.size() + 4 * lv.labels.size();
}

LabelVector read_labels(std::istream& in) {
  const json h = read_preamble(in, kLabelMagic, "label");
  require_keys(h, {"dataset_name", "split", "n_samples", "n_classes"}, {});
  LabelVector lv;
  lv.dataset_name = get_name(h, "dataset_name");
  if (!h["split"].is_string()) throw FormatError("split must be a string");
  lv.split = parse_split(h["split"].get<std::string>());
  const std::size_t n = get_count(h, "n_samples");
  lv.n_classes = get_count(h, "n_classes");
  const auto payload = read_payload(in, n * 4);
  require_eof(in);
  lv.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) lv.labels[i] = get_u32(payload.data() + 4 * i);
  validate(lv);
  return lv;
}

std::size_t write_block_file(const PredictionBlock& block, const std::filesystem::path& path) {
  return with_path(path, [&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const auto n = write_block(block, out);
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
    return n;
  });
}

PredictionBlock read_block_file(const std::filesystem::path& path) {
  return with_path(path, [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_block(in);
  });
}

std::size_t write_labels_file(const LabelVector& labels, const std::filesystem::path& path) {
  return with_path(path, [&] {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const auto n = write_labels(labels, out);
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
    return n;
  });
}

LabelVector read_labels_file(const std::filesystem::path& path) {
  return with_path(path, [&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_labels(in);
  });
}

Matrix round_to_float32(const Matrix& m) {
  Matrix out = m;
  for (auto& v : out.data()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace dgold
