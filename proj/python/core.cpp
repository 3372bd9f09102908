#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgold/error.hpp"
#include "dgold/harness.hpp"
#include "dgold/l1pf.hpp"
#include "dgold/stacker.hpp"
#include "dgold/synth.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

Array to_numpy(const dgold::Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

dgold::Matrix from_numpy(const Array& a) {
  if (a.ndim() != 2) throw dgold::ShapeError("scores must be a 2-d array");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  return dgold::Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

LabelArray labels_to_numpy(const dgold::Labels& labels) {
  LabelArray out(static_cast<py::ssize_t>(labels.size()));
  std::copy(labels.begin(), labels.end(), out.mutable_data());
  return out;
}

py::dict block_to_dict(const dgold::PredictionBlock& b) {
  py::dict d;
  d["model_name"] = b.model_name;
  d["dataset_name"] = b.dataset_name;
  d["split"] = std::string(dgold::to_string(b.split));
  d["score_kind"] = std::string(dgold::to_string(b.score_kind));
  d["scores"] = to_numpy(b.scores);
  d["solo_test_accuracy"] = b.solo_test_accuracy ? py::cast(*b.solo_test_accuracy) : py::none();
  return d;
}

std::vector<dgold::PredictionBlock> read_blocks(const std::vector<fs::path>& paths) {
  std::vector<dgold::PredictionBlock> blocks;
  blocks.reserve(paths.size());
  for (const auto& p : paths) blocks.push_back(dgold::read_block_file(p));
  return blocks;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the dgold stacking-ensemble engine";

  auto error = py::register_exception<dgold::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<dgold::ShapeError>(m, "ShapeError", error);
  py::register_exception<dgold::FactorizationError>(m, "FactorizationError", error);
  auto format = py::register_exception<dgold::FormatError>(m, "FormatError", error);
  py::register_exception<dgold::ProbabilityRowError>(m, "ProbabilityRowError", format);
  py::register_exception<dgold::LabelRangeError>(m, "LabelRangeError", format);
  py::register_exception<dgold::IoError>(m, "IoError", error);
  py::register_exception<dgold::SelectionError>(m, "SelectionError", error);
  py::register_exception<dgold::AssemblyError>(m, "AssemblyError", error);
  py::register_exception<dgold::VoteError>(m, "VoteError", error);
  py::register_exception<dgold::FitError>(m, "FitError", error);
  py::register_exception<dgold::ConfigError>(m, "ConfigError", error);

  m.def("closest_power_of_two", &dgold::closest_power_of_two, py::arg("n"));
  m.def(
      "head_plan",
      [](std::size_t in_features, std::size_t n_classes) {
        const auto plan = dgold::fbl_head_plan(in_features, n_classes);
        return py::make_tuple(plan.hidden_widths, plan.out_classes);
      },
      py::arg("in_features"), py::arg("n_classes"),
      "Hidden widths and output width of the fully connected stacking head.");

  m.def(
      "write_block",
      [](const fs::path& path, const std::string& model_name, const std::string& dataset_name, const std::string& split,
         const Array& scores, const std::string& score_kind, std::optional<double> solo_test_accuracy) {
        dgold::PredictionBlock b;
        b.model_name = model_name;
        b.dataset_name = dataset_name;
        b.split = dgold::parse_split(split);
        b.score_kind = dgold::parse_score_kind(score_kind);
        b.scores = from_numpy(scores);
        b.solo_test_accuracy = solo_test_accuracy;
        return dgold::write_block_file(b, path);
      },
      py::arg("path"), py::arg("model_name"), py::arg("dataset_name"), py::arg("split"), py::arg("scores"),
      py::arg("score_kind") = "probs", py::arg("solo_test_accuracy") = py::none(),
      "Write an L1PF prediction block; returns the number of bytes written.");
  m.def(
      "read_block", [](const fs::path& path) { return block_to_dict(dgold::read_block_file(path)); }, py::arg("path"));

  m.def(
      "write_labels",
      [](const fs::path& path, const std::string& dataset_name, const std::string& split, std::size_t n_classes,
         const LabelArray& labels) {
        dgold::LabelVector lv;
        lv.dataset_name = dataset_name;
        lv.split = dgold::parse_split(split);
        lv.n_classes = n_classes;
        lv.labels.assign(labels.data(), labels.data() + labels.size());
        return dgold::write_labels_file(lv, path);
      },
      py::arg("path"), py::arg("dataset_name"), py::arg("split"), py::arg("n_classes"), py::arg("labels"));
  m.def(
      "read_labels",
      [](const fs::path& path) {
        const auto lv = dgold::read_labels_file(path);
        py::dict d;
        d["dataset_name"] = lv.dataset_name;
        d["split"] = std::string(dgold::to_string(lv.split));
        d["n_classes"] = lv.n_classes;
        d["labels"] = labels_to_numpy(lv.labels);
        return d;
      },
      py::arg("path"));

  m.def(
      "stack",
      [](const std::vector<fs::path>& block_paths, const fs::path& label_path, bool softmax) {
        auto blocks = read_blocks(block_paths);
        if (softmax)
          for (auto& b : blocks) b = dgold::to_probabilities(b);
        const auto ds = dgold::build_stacked_dataset(blocks, dgold::read_labels_file(label_path));
        std::vector<std::string> columns;
        for (const auto& c : ds.feature_layout) columns.push_back(c.model_name + ":" + std::to_string(c.class_index));
        return py::make_tuple(to_numpy(ds.features), labels_to_numpy(ds.labels.labels), columns);
      },
      py::arg("block_paths"), py::arg("label_path"), py::arg("softmax") = false,
      "Concatenate prediction blocks column-wise; returns (features, labels, column names).");

  m.def(
      "majority_vote",
      [](const std::vector<fs::path>& block_paths, const fs::path& label_path) {
        const auto result = dgold::majority_vote(read_blocks(block_paths), dgold::read_labels_file(label_path));
        return py::make_tuple(labels_to_numpy(result.predictions), result.accuracy);
      },
      py::arg("block_paths"), py::arg("label_path"));

  m.def(
      "synth",
      [](const fs::path& out_dir, std::size_t n_models, std::size_t n_classes, std::size_t n_train, std::size_t n_test,
         double accuracy_low, double accuracy_high, double correlation, std::uint64_t seed,
         const std::string& dataset_name, const std::string& score_kind) {
        dgold::SynthConfig cfg;
        cfg.n_models = n_models;
        cfg.n_classes = n_classes;
        cfg.n_train = n_train;
        cfg.n_test = n_test;
        cfg.per_model_accuracy = dgold::uniform_accuracies(n_models, accuracy_low, accuracy_high, seed);
        cfg.error_correlation = correlation;
        cfg.seed = seed;
        cfg.dataset_name = dataset_name;
        cfg.score_kind = dgold::parse_score_kind(score_kind);
        const auto data = dgold::generate(cfg);
        dgold::write_synth(data, out_dir);
        return data.realized_test_accuracy;
      },
      py::arg("out_dir"), py::arg("n_models") = 7, py::arg("n_classes") = 10, py::arg("n_train") = 10000,
      py::arg("n_test") = 2000, py::arg("accuracy_low") = 0.55, py::arg("accuracy_high") = 0.8,
      py::arg("correlation") = 0.0, py::arg("seed") = 0, py::arg("dataset_name") = "synthetic",
      py::arg("score_kind") = "probs",
      "Generate synthetic base-model blocks into out_dir; returns realized test accuracies.");

  m.def(
      "run_experiment",
      [](const fs::path& block_dir, std::optional<fs::path> label_dir, const std::string& dataset_name,
         const std::vector<std::size_t>& sizes, std::size_t repetitions, const std::vector<std::string>& algorithms,
         bool tune, std::size_t trials, std::uint64_t seed, std::optional<std::size_t> max_epochs,
         const std::string& format) {
        dgold::ExperimentConfig cfg;
        cfg.block_directory = block_dir;
        cfg.label_directory = label_dir.value_or(fs::path());
        cfg.dataset_name = dataset_name;
        cfg.ensemble_sizes = sizes;
        cfg.repetitions = repetitions;
        cfg.algorithms.clear();
        for (const auto& a : algorithms) cfg.algorithms.push_back(dgold::parse_algorithm(a));
        cfg.tune = tune;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.max_epochs = max_epochs;
        const auto fmt = dgold::parse_report_format(format);
        py::gil_scoped_release release;
        return dgold::emit_report(dgold::run_experiment(cfg), fmt);
      },
      py::arg("block_dir"), py::arg("label_dir") = py::none(), py::arg("dataset_name") = "",
      py::arg("sizes") = std::vector<std::size_t>{3, 7, 11}, py::arg("repetitions") = 10,
      py::arg("algorithms") = std::vector<std::string>{"RG", "KN"}, py::arg("tune") = false, py::arg("trials") = 50,
      py::arg("seed") = 0, py::arg("max_epochs") = py::none(), py::arg("format") = "json",
      "Run the ensemble-size experiment and return the report in the requested format.");
}
