// dgold: command-line front end of the stacking engine.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "dgold/error.hpp"
#include "dgold/harness.hpp"
#include "dgold/random.hpp"
#include "dgold/stacker.hpp"
#include "dgold/synth.hpp"
#include "dgold/tuner.hpp"

namespace {

using namespace dgold;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) out.push_back(tok);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_real(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError(std::string("bad ") + what + " '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || s[0] == '-') throw ConfigError(std::string("bad ") + what + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out.flush()) throw IoError("write failed: " + path);
}

std::vector<PredictionBlock> read_blocks(const std::vector<std::string>& paths, bool softmax) {
  std::vector<PredictionBlock> out;
  for (const auto& p : paths) {
    auto b = read_block_file(p);
    out.push_back(softmax ? to_probabilities(b) : std::move(b));
  }
  return out;
}

/// "0.7" for every model, "0.6,0.7,..." per model, or "lo:hi" for uniform draws.
std::vector<double> parse_accuracies(const std::string& spec, std::size_t n_models, std::uint64_t seed) {
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    const double lo = parse_real(spec.substr(0, colon), "accuracy range");
    const double hi = parse_real(spec.substr(colon + 1), "accuracy range");
    if (!(lo <= hi)) throw ConfigError("accuracy range needs lo <= hi");
    return uniform_accuracies(n_models, lo, hi, seed);
  }
  const auto parts = split_list(spec);
  std::vector<double> acc;
  for (const auto& p : parts) acc.push_back(parse_real(p, "accuracy"));
  if (acc.size() == 1) acc.assign(n_models, acc[0]);
  return acc;
}

std::optional<std::chrono::duration<double>> timeout_from(double seconds) {
  if (seconds <= 0.0) return std::nullopt;
  return std::chrono::duration<double>(seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stacking-ensemble engine: level-1 score blocks to level-2 learners"};
  app.require_subcommand(1);

  // stack
  auto* stack = app.add_subcommand("stack", "Concatenate score blocks into a stacked dataset (CSV)");
  std::vector<std::string> stack_blocks;
  std::string stack_labels, stack_out;
  bool stack_softmax = false;
  stack->add_option("--blocks", stack_blocks, "L1PF block files, in feature order")->required();
  stack->add_option("--labels", stack_labels, "Label file of the same split")->required();
  stack->add_option("--out", stack_out, "Output file")->required();
  stack->add_flag("--softmax", stack_softmax, "Convert logit blocks to probabilities first");

  // vote
  auto* vote = app.add_subcommand("vote", "Majority-vote accuracy of an ensemble");
  std::vector<std::string> vote_blocks;
  std::string vote_labels;
  vote->add_option("--blocks", vote_blocks, "L1PF block files")->required();
  vote->add_option("--labels", vote_labels, "Label file of the same split")->required();

  // search
  auto* srch = app.add_subcommand("search", "Random hyperparameter search on a stacked training set");
  std::string search_alg, search_train, search_out;
  std::size_t search_trials = 50;
  std::uint64_t search_seed = 0;
  double search_val = 0.2, search_timeout = 0.0;
  bool search_timing = false;
  srch->add_option("--alg", search_alg, "Learner tag: SG PA RG LR KN RF MP")->required();
  srch->add_option("--train", search_train, "Stacked training set written by 'stack'")->required();
  srch->add_option("--trials", search_trials, "Number of trials");
  srch->add_option("--seed", search_seed, "Seed");
  srch->add_option("--val-fraction", search_val, "Holdout fraction");
  srch->add_option("--timeout", search_timeout, "Per-trial time limit in seconds (0 = none)");
  srch->add_flag("--timing", search_timing, "Include per-trial fit seconds in the log");
  srch->add_option("--out", search_out, "Trial log file (default stdout)");

  // synth
  auto* syn = app.add_subcommand("synth", "Generate synthetic score blocks and label files");
  std::size_t syn_models = 7, syn_classes = 10, syn_train = 10000, syn_test = 2000;
  std::string syn_acc = "0.7", syn_dir, syn_dataset = "synthetic";
  double syn_corr = 0.0, syn_temp = 1.0, syn_hint = 0.5;
  std::uint64_t syn_seed = 0;
  bool syn_logits = false;
  syn->add_option("--models", syn_models, "Number of models");
  syn->add_option("--classes", syn_classes, "Number of classes");
  syn->add_option("--train", syn_train, "Training samples");
  syn->add_option("--test", syn_test, "Test samples");
  syn->add_option("--acc", syn_acc, "Accuracy: one value, a comma list, or lo:hi for uniform draws");
  syn->add_option("--corr", syn_corr, "Error correlation in [0, 1]");
  syn->add_option("--temperature", syn_temp, "Softmax temperature");
  syn->add_option("--hint", syn_hint, "Chance a wrong model ranks the true class second");
  syn->add_option("--dataset", syn_dataset, "Dataset name written to the headers");
  syn->add_flag("--logits", syn_logits, "Emit log-probabilities with score_kind=logits");
  syn->add_option("--seed", syn_seed, "Seed");
  syn->add_option("--out-dir", syn_dir, "Output directory")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run the Net / Maj / ML protocol");
  std::string exp_blocks, exp_labels, exp_sizes = "3,7,11", exp_algs = "SG,PA,RG,LR,KN,RF,MP", exp_format = "text",
                                      exp_out, exp_dataset;
  std::size_t exp_reps = 10, exp_trials = 50;
  std::uint64_t exp_seed = 0;
  double exp_timeout = 0.0, exp_val = 0.2;
  bool exp_tune = false, exp_softmax = false;
  exp->add_option("--blocks", exp_blocks, "Directory of L1PF block files")->required();
  exp->add_option("--labels", exp_labels, "Directory of label files (default: --blocks)");
  exp->add_option("--dataset", exp_dataset, "Dataset name when the directory holds several");
  exp->add_option("--sizes", exp_sizes, "Ensemble sizes");
  exp->add_option("--reps", exp_reps, "Repetitions per size");
  exp->add_option("--algs", exp_algs, "Learner tags; empty for Net/Maj only");
  exp->add_flag("--tune", exp_tune, "Random-search each learner's hyperparameters");
  exp->add_option("--trials", exp_trials, "Trials per search");
  exp->add_option("--val-fraction", exp_val, "Holdout fraction for tuning");
  exp->add_option("--seed", exp_seed, "Master seed");
  exp->add_option("--timeout", exp_timeout, "Per-learner time limit in seconds (0 = none)");
  exp->add_flag("--softmax", exp_softmax, "Use softmax probabilities of the stored scores as features");
  exp->add_option("--format", exp_format, "text, csv or json");
  exp->add_option("--out", exp_out, "Report file (default stdout)");

  // head-plan
  auto* plan = app.add_subcommand("head-plan", "Hidden widths of a replacement classifier head");
  std::size_t plan_in = 0, plan_classes = 0;
  plan->add_option("--in", plan_in, "Input features")->required();
  plan->add_option("--classes", plan_classes, "Output classes")->required();

  // head-plan-fixture
  auto* fixture = app.add_subcommand("head-plan-fixture", "Write (in_features, n_classes) -> plan test vectors");
  std::size_t fixture_count = 200;
  std::uint64_t fixture_seed = 0;
  std::string fixture_out;
  fixture->add_option("--count", fixture_count, "Number of pairs");
  fixture->add_option("--seed", fixture_seed, "Seed");
  fixture->add_option("--out", fixture_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*stack) {
      const auto blocks = read_blocks(stack_blocks, stack_softmax);
      const auto labels = read_labels_file(stack_labels);
      const auto ds = build_stacked_dataset(blocks, labels);
      write_stacked_csv_file(ds, stack_out);
      std::cout << ds.n_samples() << " rows, " << ds.n_features() << " features + 1 target column ("
                << ds.n_features() + 1 << " with target)\n";
    } else if (*vote) {
      const auto blocks = read_blocks(vote_blocks, false);
      const auto labels = read_labels_file(vote_labels);
      const auto result = majority_vote(blocks, labels);
      std::printf("majority vote accuracy: %.6f\n", result.accuracy);
    } else if (*srch) {
      const Algorithm alg = parse_algorithm(search_alg);
      const auto train = read_stacked_csv_file(search_train);
      if (train.split != Split::train) throw ConfigError("search needs a train-split stacked dataset");
      SearchOptions so;
      so.n_trials = search_trials;
      so.seed = search_seed;
      so.val_fraction = search_val;
      so.timeout = timeout_from(search_timeout);
      const auto result = search(train, alg, so);
      write_output(trial_log_json(result, alg, search_timing), search_out);
    } else if (*syn) {
      SynthConfig cfg;
      cfg.n_models = syn_models;
      cfg.n_classes = syn_classes;
      cfg.n_train = syn_train;
      cfg.n_test = syn_test;
      cfg.per_model_accuracy = parse_accuracies(syn_acc, syn_models, syn_seed);
      cfg.error_correlation = syn_corr;
      cfg.temperature = syn_temp;
      cfg.runner_up_hint = syn_hint;
      cfg.dataset_name = syn_dataset;
      cfg.score_kind = syn_logits ? ScoreKind::logits : ScoreKind::probs;
      cfg.seed = syn_seed;
      const auto data = generate(cfg);
      write_synth(data, syn_dir);
      for (std::size_t m = 0; m < syn_models; ++m) {
        std::printf("%s target %.4f realized %.4f\n", synth_model_name(m).c_str(), cfg.per_model_accuracy[m],
                    data.realized_test_accuracy[m]);
      }
    } else if (*exp) {
      ExperimentConfig cfg;
      cfg.block_directory = exp_blocks;
      cfg.label_directory = exp_labels;
      cfg.dataset_name = exp_dataset;
      cfg.ensemble_sizes.clear();
      for (const auto& s : split_list(exp_sizes)) cfg.ensemble_sizes.push_back(parse_count(s, "ensemble size"));
      cfg.repetitions = exp_reps;
      cfg.algorithms.clear();
      for (const auto& a : split_list(exp_algs)) cfg.algorithms.push_back(parse_algorithm(a));
      cfg.tune = exp_tune;
      cfg.trials = exp_trials;
      cfg.val_fraction = exp_val;
      cfg.seed = exp_seed;
      cfg.timeout = timeout_from(exp_timeout);
      cfg.softmax_features = exp_softmax;
      const auto format = parse_report_format(exp_format);
      const auto report = run_experiment(cfg);
      write_output(emit_report(report, format), exp_out);
    } else if (*plan) {
      if (plan_in == 0 || plan_classes < 2) throw ConfigError("head-plan needs --in >= 1 and --classes >= 2");
      const auto p = fbl_head_plan(plan_in, plan_classes);
      std::cout << plan_in;
      for (auto w : p.hidden_widths) std::cout << " -> " << w;
      std::cout << " -> " << p.out_classes << "\n";
    } else if (*fixture) {
      Rng rng(derive_seed(fixture_seed, {0xf1}));
      nlohmann::json cases = nlohmann::json::array();
      for (std::size_t i = 0; i < fixture_count; ++i) {
        const std::size_t in = 1 + rng.below(4096);
        const std::size_t classes = 2 + rng.below(299);
        const auto p = fbl_head_plan(in, classes);
        cases.push_back({{"in_features", in}, {"n_classes", classes}, {"hidden", p.hidden_widths},
                         {"out", p.out_classes}});
      }
      write_output(nlohmann::json{{"version", 1}, {"cases", cases}}.dump(1) + "\n", fixture_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SelectionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FitError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
