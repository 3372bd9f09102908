#include "dgold/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "dgold/error.hpp"
#include "dgold/random.hpp"
#include "dgold/stacker.hpp"
#include "dgold/tuner.hpp"

namespace dgold {

void ExperimentConfig::validate() const {
  if (ensemble_sizes.empty()) throw ConfigError("no ensemble sizes given");
  for (auto s : ensemble_sizes)
    if (s == 0) throw ConfigError("ensemble sizes must be at least 1");
  if (repetitions == 0) throw ConfigError("repetitions must be at least 1");
  std::set<Algorithm> seen;
  for (auto a : algorithms)
    if (!seen.insert(a).second) throw ConfigError("algorithm " + std::string(algorithm_tag(a)) + " listed twice");
  if (tune && trials == 0) throw ConfigError("trials must be at least 1 when tuning");
  if (tune && !(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
  if (timeout && !(timeout->count() > 0.0)) throw ConfigError("timeout must be positive");
  if (max_epochs && *max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
}

void ExperimentInputs::validate() const {
  if (train_blocks.size() != test_blocks.size()) throw ConfigError("train and test block counts differ");
  if (train_blocks.empty()) throw ConfigError("no prediction blocks");
  if (train_labels.split != Split::train || test_labels.split != Split::test) {
    throw ConfigError("label vectors are not a train/test pair");
  }
  std::set<std::string> names;
  for (std::size_t m = 0; m < train_blocks.size(); ++m) {
    const auto& tr = train_blocks[m];
    const auto& te = test_blocks[m];
    if (!names.insert(tr.model_name).second) throw ConfigError("duplicate model '" + tr.model_name + "'");
    if (te.model_name != tr.model_name) throw ConfigError("model order differs between splits at " + tr.model_name);
    if (tr.split != Split::train || te.split != Split::test) {
      throw ConfigError("model '" + tr.model_name + "' has blocks with the wrong split");
    }
    for (const auto* b : {&tr, &te}) {
      const auto& labels = b->split == Split::train ? train_labels : test_labels;
      if (b->dataset_name != labels.dataset_name || b->n_samples() != labels.labels.size() ||
          b->n_classes() != labels.n_classes) {
        throw ConfigError("block " + b->model_name + "/" + std::string(to_string(b->split)) +
                          " does not match its label file");
      }
    }
  }
}

std::vector<std::string> ExperimentInputs::model_names() const {
  std::vector<std::string> out;
  for (const auto& b : train_blocks) out.push_back(b.model_name);
  return out;
}

namespace {

std::array<char, 4> file_magic(const std::filesystem::path& p) {
  std::array<char, 4> m{};
  std::ifstream in(p, std::ios::binary);
  if (!in.read(m.data(), 4)) return {};
  return m;
}

std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw ConfigError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

ExperimentInputs load_inputs(const std::filesystem::path& block_dir, const std::filesystem::path& label_dir,
                             const std::string& dataset_name) {
  std::map<std::string, std::map<Split, PredictionBlock>> blocks;  // dataset/model -> split
  std::map<std::string, std::map<Split, LabelVector>> labels;
  std::set<std::string> datasets;
  const auto& ldir = label_dir.empty() ? block_dir : label_dir;

  for (const auto& f : sorted_files(block_dir)) {
    if (file_magic(f) != kBlockMagic) continue;
    auto b = read_block_file(f);
    if (!dataset_name.empty() && b.dataset_name != dataset_name) continue;
    datasets.insert(b.dataset_name);
    const auto key = b.dataset_name + "\n" + b.model_name;
    const Split s = b.split;
    if (!blocks[key].emplace(s, std::move(b)).second) {
      throw ConfigError("duplicate " + std::string(to_string(s)) + " block in " + f.string());
    }
  }
  for (const auto& f : sorted_files(ldir)) {
    if (file_magic(f) != kLabelMagic) continue;
    auto l = read_labels_file(f);
    if (!dataset_name.empty() && l.dataset_name != dataset_name) continue;
    const Split s = l.split;
    if (!labels[l.dataset_name].emplace(s, std::move(l)).second) {
      throw ConfigError("duplicate " + std::string(to_string(s)) + " label file " + f.string());
    }
  }
  if (datasets.empty()) {
    throw ConfigError("no prediction blocks" + (dataset_name.empty() ? "" : " for dataset '" + dataset_name + "'") +
                      " in " + block_dir.string());
  }
  if (datasets.size() > 1) throw ConfigError("several datasets in " + block_dir.string() + "; choose one");
  const std::string ds = *datasets.begin();

  ExperimentInputs in;
  const auto lit = labels.find(ds);
  if (lit == labels.end() || !lit->second.contains(Split::train) || !lit->second.contains(Split::test)) {
    throw ConfigError("missing train or test label file for dataset '" + ds + "' in " + ldir.string());
  }
  in.train_labels = lit->second.at(Split::train);
  in.test_labels = lit->second.at(Split::test);
  for (auto& [key, splits] : blocks) {
    const auto model = key.substr(key.find('\n') + 1);
    if (!splits.contains(Split::train) || !splits.contains(Split::test)) {
      throw ConfigError("model '" + model + "' lacks a " +
                        std::string(splits.contains(Split::train) ? "test" : "train") + " block");
    }
    in.train_blocks.push_back(std::move(splits.at(Split::train)));
    in.test_blocks.push_back(std::move(splits.at(Split::test)));
  }
  in.validate();
  return in;
}

std::string_view to_string(Winner w) noexcept {
  switch (w) {
    case Winner::Net: return "Net";
    case Winner::Maj: return "Maj";
    case Winner::ML: return "ML";
  }
  return "Net";
}

Winner parse_winner(std::string_view s) {
  if (s == "Net") return Winner::Net;
  if (s == "Maj") return Winner::Maj;
  if (s == "ML") return Winner::ML;
  throw FormatError("unknown winner '" + std::string(s) + "'");
}

Winner decide_winner(double net, double maj, const std::optional<BestMl>& best_ml) {
  if (best_ml && best_ml->score >= net && best_ml->score >= maj) return Winner::ML;
  return maj >= net ? Winner::Maj : Winner::Net;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto inputs = load_inputs(config.block_directory, config.label_directory, config.dataset_name);
  return run_experiment(config, inputs);
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ExperimentInputs& inputs) {
  config.validate();
  inputs.validate();
  const auto names = inputs.model_names();
  const std::size_t largest = *std::max_element(config.ensemble_sizes.begin(), config.ensemble_sizes.end());
  if (largest > names.size()) {
    throw ConfigError("ensemble size " + std::to_string(largest) + " exceeds the " + std::to_string(names.size()) +
                      " available models");
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t m = 0; m < names.size(); ++m) index[names[m]] = m;
  auto prepare = [&](const PredictionBlock& b) { return config.softmax_features ? to_probabilities(b) : b; };
  std::vector<PredictionBlock> train_all, test_all;
  for (std::size_t m = 0; m < names.size(); ++m) {
    train_all.push_back(prepare(inputs.train_blocks[m]));
    test_all.push_back(prepare(inputs.test_blocks[m]));
  }

  ExperimentReport report;
  report.dataset_name = inputs.train_labels.dataset_name;
  report.seed = config.seed;
  report.tuned = config.tune;
  report.algorithms = config.algorithms;

  for (std::size_t size : config.ensemble_sizes) {
    for (std::size_t rep = 1; rep <= config.repetitions; ++rep) {
      CellResult cell;
      cell.size = size;
      cell.repetition = rep;
      const auto spec = select_ensemble(names, size, derive_seed(config.seed, {size, rep}));
      cell.models = spec.model_names;
      std::vector<PredictionBlock> tr, te;
      cell.net_score = 0.0;
      for (const auto& name : spec.model_names) {
        const std::size_t m = index.at(name);
        tr.push_back(train_all[m]);
        te.push_back(test_all[m]);
        const auto& raw = inputs.test_blocks[m];
        const double solo = raw.solo_test_accuracy ? *raw.solo_test_accuracy
                                                   : accuracy(argmax_rows(raw.scores), inputs.test_labels.labels);
        cell.net_score = std::max(cell.net_score, solo);
      }
      cell.maj_score = majority_vote(te, inputs.test_labels).accuracy;

      if (!config.algorithms.empty()) {
        const auto train = build_stacked_dataset(tr, inputs.train_labels);
        const auto test = build_stacked_dataset(te, inputs.test_labels);
        for (Algorithm alg : config.algorithms) {
          AlgorithmScore score;
          score.algorithm = alg;
          const auto seed = derive_seed(config.seed, {size, rep, 100u + static_cast<std::uint64_t>(alg)});
          try {
            std::unique_ptr<FittedModel> model;
            if (config.tune) {
              SearchOptions so;
              so.n_trials = config.trials;
              so.seed = seed;
              so.val_fraction = config.val_fraction;
              so.max_epochs = config.max_epochs;
              so.timeout = config.timeout;
              auto found = search(train, alg, so);
              model = std::move(found.model);
            } else {
              TrainOptions opts;
              opts.seed = seed;
              opts.max_epochs = config.max_epochs;
              opts.timeout = config.timeout;
              model = fit(alg, train, default_hyperparams(alg), opts);
            }
            score.hyperparams = model->hyperparams();
            score.timed_out = model->timed_out();
            score.accuracy = accuracy(model->predict(test.features), test.labels.labels);
          } catch (const FitError& e) {
            score.failed = true;
            score.error = e.what();
          } catch (const ConfigError& e) {
            score.failed = true;
            score.error = e.what();
          }
          if (score.valid() && (!cell.best_ml || score.accuracy > cell.best_ml->score)) {
            cell.best_ml = BestMl{score.accuracy, alg};
          }
          cell.ml_scores.push_back(std::move(score));
        }
      }
      cell.winner = decide_winner(cell.net_score, cell.maj_score, cell.best_ml);
      switch (cell.winner) {
        case Winner::Net: ++report.wins_net; break;
        case Winner::Maj: ++report.wins_maj; break;
        case Winner::ML: ++report.wins_ml; break;
      }
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "text" || s == "table") return ReportFormat::text;
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw ConfigError("unknown report format '" + std::string(s) + "' (text, csv, json)");
}

namespace {

std::string fixed(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string percent(double v) { return fixed("%.2f%%", 100.0 * v); }

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string emit_text(const ExperimentReport& r) {
  const bool with_ml = !r.algorithms.empty();
  std::string out = "dataset: " + r.dataset_name + "  seed: " + std::to_string(r.seed) +
                    "  tuned: " + (r.tuned ? "yes" : "no") + "\n";
  std::string header = pad("size", 6) + pad("rep", 5) + pad("Net", 12) + (with_ml ? pad("Maj", 12) + "ML" : "Maj");
  out += header + "\n";
  for (const auto& c : r.cells) {
    auto mark = [&](Winner w, std::string s) { return c.winner == w ? "**" + s + "**" : s; };
    std::string ml = "n/a";
    if (c.best_ml) ml = percent(c.best_ml->score) + " (" + std::string(algorithm_tag(c.best_ml->algorithm)) + ")";
    std::string line = pad(std::to_string(c.size), 6) + pad(std::to_string(c.repetition), 5) +
                       pad(mark(Winner::Net, percent(c.net_score)), 12);
    if (with_ml) {
      line += pad(mark(Winner::Maj, percent(c.maj_score)), 12) + mark(Winner::ML, ml);
    } else {
      line += mark(Winner::Maj, percent(c.maj_score));
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  out += "wins: Net " + std::to_string(r.wins_net) + "  Maj " + std::to_string(r.wins_maj);
  if (with_ml) out += "  ML " + std::to_string(r.wins_ml);
  return out + "\n";
}

std::string emit_csv(const ExperimentReport& r) {
  std::string out = "size,repetition,models,net,maj";
  for (auto a : r.algorithms) out += "," + std::string(algorithm_tag(a));
  if (!r.algorithms.empty()) out += ",best_ml,best_ml_algorithm";
  out += ",winner\n";
  for (const auto& c : r.cells) {
    std::string models;
    for (std::size_t i = 0; i < c.models.size(); ++i) models += (i ? ";" : "") + c.models[i];
    out += std::to_string(c.size) + "," + std::to_string(c.repetition) + "," + models + "," +
           fixed("%.6f", c.net_score) + "," + fixed("%.6f", c.maj_score);
    for (const auto& s : c.ml_scores) {
      out += ",";
      out += s.failed ? "failed" : s.timed_out ? "timed_out" : fixed("%.6f", s.accuracy);
    }
    if (!r.algorithms.empty()) {
      out += c.best_ml ? "," + fixed("%.6f", c.best_ml->score) + "," + std::string(algorithm_tag(c.best_ml->algorithm))
                       : ",,";
    }
    out += "," + std::string(to_string(c.winner)) + "\n";
  }
  return out;
}

nlohmann::json hyper_json(const Hyperparams& hp) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : hp) std::visit([&, &k = k](const auto& x) { j[k] = x; }, v);
  return j;
}

Hyperparams hyper_from_json(const nlohmann::json& j) {
  Hyperparams hp;
  for (const auto& [k, v] : j.items()) {
    if (v.is_boolean()) {
      hp[k] = v.get<bool>();
    } else if (v.is_number_integer()) {
      hp[k] = v.get<std::int64_t>();
    } else if (v.is_number_float()) {
      hp[k] = v.get<double>();
    } else if (v.is_string()) {
      hp[k] = v.get<std::string>();
    } else {
      throw FormatError("hyperparameter '" + k + "' has an unsupported type");
    }
  }
  return hp;
}

std::string emit_json(const ExperimentReport& r) {
  nlohmann::json algs = nlohmann::json::array();
  for (auto a : r.algorithms) algs.push_back(std::string(algorithm_tag(a)));
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json ml = nlohmann::json::array();
    for (const auto& s : c.ml_scores) {
      ml.push_back({{"algorithm", std::string(algorithm_tag(s.algorithm))},
                    {"accuracy", s.accuracy},
                    {"timed_out", s.timed_out},
                    {"failed", s.failed},
                    {"error", s.error},
                    {"hyperparams", hyper_json(s.hyperparams)}});
    }
    nlohmann::json cell = {{"size", c.size},           {"repetition", c.repetition},
                           {"models", c.models},       {"net", c.net_score},
                           {"maj", c.maj_score},       {"ml", ml},
                           {"winner", std::string(to_string(c.winner))}};
    cell["best_ml"] = c.best_ml ? nlohmann::json{{"score", c.best_ml->score},
                                                 {"algorithm", std::string(algorithm_tag(c.best_ml->algorithm))}}
                                : nlohmann::json(nullptr);
    cells.push_back(std::move(cell));
  }
  nlohmann::json j = {{"dataset", r.dataset_name},
                      {"seed", r.seed},
                      {"tuned", r.tuned},
                      {"algorithms", algs},
                      {"cells", cells},
                      {"wins", {{"Net", r.wins_net}, {"Maj", r.wins_maj}, {"ML", r.wins_ml}}}};
  return j.dump(2) + "\n";
}

}  // namespace

std::string emit_report(const ExperimentReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::text: return emit_text(report);
    case ReportFormat::csv: return emit_csv(report);
    case ReportFormat::json: return emit_json(report);
  }
  return {};
}

ExperimentReport parse_report_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ExperimentReport r;
    r.dataset_name = j.at("dataset").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.tuned = j.at("tuned").get<bool>();
    for (const auto& a : j.at("algorithms")) r.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    for (const auto& jc : j.at("cells")) {
      CellResult c;
      c.size = jc.at("size").get<std::size_t>();
      c.repetition = jc.at("repetition").get<std::size_t>();
      c.models = jc.at("models").get<std::vector<std::string>>();
      c.net_score = jc.at("net").get<double>();
      c.maj_score = jc.at("maj").get<double>();
      for (const auto& js : jc.at("ml")) {
        AlgorithmScore s;
        s.algorithm = parse_algorithm(js.at("algorithm").get<std::string>());
        s.accuracy = js.at("accuracy").get<double>();
        s.timed_out = js.at("timed_out").get<bool>();
        s.failed = js.at("failed").get<bool>();
        s.error = js.at("error").get<std::string>();
        s.hyperparams = hyper_from_json(js.at("hyperparams"));
        c.ml_scores.push_back(std::move(s));
      }
      if (const auto& b = jc.at("best_ml"); !b.is_null()) {
        c.best_ml = BestMl{b.at("score").get<double>(), parse_algorithm(b.at("algorithm").get<std::string>())};
      }
      c.winner = parse_winner(jc.at("winner").get<std::string>());
      r.cells.push_back(std::move(c));
    }
    const auto& w = j.at("wins");
    r.wins_net = w.at("Net").get<std::size_t>();
    r.wins_maj = w.at("Maj").get<std::size_t>();
    r.wins_ml = w.at("ML").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  }
}

}  // namespace dgold
