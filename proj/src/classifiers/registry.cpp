#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dgold/classifiers.hpp"
#include "dgold/error.hpp"

namespace dgold {

std::unique_ptr<FittedModel> fit(Algorithm algorithm, const Matrix& x, std::span<const Label> y,
                                 std::size_t n_classes, const Hyperparams& hp, const TrainOptions& opts) {
  switch (algorithm) {
    case Algorithm::SG:
      return std::make_unique<LinearModel>(fit_sgd(x, y, n_classes, SgdParams::from(hp), opts));
    case Algorithm::PA:
      return std::make_unique<LinearModel>(
          fit_passive_aggressive(x, y, n_classes, PassiveAggressiveParams::from(hp), opts));
    case Algorithm::RG:
      opts.validate();
      return std::make_unique<LinearModel>(fit_ridge(x, y, n_classes, RidgeParams::from(hp)));
    case Algorithm::LR:
      return std::make_unique<LinearModel>(fit_logistic(x, y, n_classes, LogisticParams::from(hp), opts));
    case Algorithm::KN:
      opts.validate();
      return std::make_unique<KnnModel>(fit_knn(x, y, n_classes, KnnParams::from(hp)));
    case Algorithm::RF:
      return std::make_unique<ForestModel>(fit_random_forest(x, y, n_classes, ForestParams::from(hp), opts));
    case Algorithm::MP:
      return std::make_unique<MlpModel>(fit_mlp(x, y, n_classes, MlpParams::from(hp), opts));
  }
  throw FitError("unknown algorithm");
}

std::unique_ptr<FittedModel> fit(Algorithm algorithm, const StackedDataset& train, const Hyperparams& hp,
                                 const TrainOptions& opts) {
  return fit(algorithm, train.features, train.labels.labels, train.n_classes(), hp, opts);
}

Hyperparams default_hyperparams(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::SG: return SgdParams{}.to_hyperparams();
    case Algorithm::PA: return PassiveAggressiveParams{}.to_hyperparams();
    case Algorithm::RG: return RidgeParams{}.to_hyperparams();
    case Algorithm::LR: return LogisticParams{}.to_hyperparams();
    case Algorithm::KN: return KnnParams{}.to_hyperparams();
    case Algorithm::RF: return ForestParams{}.to_hyperparams();
    case Algorithm::MP: return MlpParams{}.to_hyperparams();
  }
  return {};
}

std::string hyperparams_json(const Hyperparams& hp) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : hp) std::visit([&, &k = k](const auto& x) { j[k] = x; }, v);
  return j.dump();
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::filesystem::path fresh_work_dir() {
  static std::atomic<unsigned> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    auto dir = base / ("dgold-ext-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    if (std::filesystem::create_directory(dir)) return dir;
  }
}

}  // namespace

Labels run_external_learner(const ExternalLearner& learner, const StackedDataset& train, const StackedDataset& test,
                            const Hyperparams& hp) {
  if (learner.command.empty()) throw FitError("external learner command is empty");
  if (train.n_features() != test.n_features() || train.n_classes() != test.n_classes()) {
    throw FitError("external learner: train and test datasets disagree in shape");
  }
  const bool own_dir = learner.work_dir.empty();
  const auto dir = own_dir ? fresh_work_dir() : learner.work_dir;
  const auto train_path = dir / "train.csv";
  const auto test_path = dir / "test.csv";
  write_stacked_csv_file(train, train_path);
  write_stacked_csv_file(test, test_path);

  const std::string cmd = learner.command + " " + shell_quote(train_path.string()) + " " +
                          shell_quote(test_path.string()) + " " + shell_quote(hyperparams_json(hp));
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw FitError("cannot start external learner '" + learner.command + "'");
  std::string output;
  char buf[4096];
  while (const std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) output.append(buf, got);
  const int status = ::pclose(pipe);
  if (own_dir) {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw FitError("external learner '" + learner.command + "' failed with status " + std::to_string(status));
  }

  Labels out;
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size()) throw FitError("external learner printed a non-integer line '" + line + "'");
    if (v >= test.n_classes()) throw FitError("external learner predicted out-of-range label " + line);
    out.push_back(static_cast<Label>(v));
  }
  if (out.size() != test.n_samples()) {
    throw FitError("external learner printed " + std::to_string(out.size()) + " labels for " +
                   std::to_string(test.n_samples()) + " test rows");
  }
  return out;
}

}  // namespace dgold
