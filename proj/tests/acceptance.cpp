// Acceptance suite: one PASS/FAIL line per criterion.
//
//   dgold_acceptance                      run every criterion
//   dgold_acceptance --criterion NAME     run one
//   dgold_acceptance --list               print the names

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dgold/classifiers.hpp"
#include "dgold/error.hpp"
#include "dgold/harness.hpp"
#include "dgold/random.hpp"
#include "dgold/stacker.hpp"
#include "dgold/synth.hpp"
#include "dgold/tuner.hpp"

using namespace dgold;

namespace {

// Tolerances and budgets. CPU seconds are process CPU time.
constexpr double kRidgeRelTol = 1e-8;
constexpr double kGradRelTol = 1e-5;
constexpr double kGradRelFloor = 1e-6;  // denominator floor for near-zero components
constexpr double kStackedBudget = 10.0;
constexpr double kRidgeBudget = 5.0;
constexpr double kKnnBudget = 5.0;
constexpr double kVoteBudget = 5.0;
constexpr double kGradBudget = 10.0;
constexpr double kFindingBudget = 600.0;
constexpr double kDominanceBudget = 1800.0;
constexpr double kBoundsBudget = 5.0;
constexpr int kFindingMinBeatsNet = 25;
constexpr int kFindingMinBeatsMaj = 22;
constexpr double kDominanceMinShare = 0.60;
const std::vector<std::uint64_t> kSuiteSeeds{1, 2, 3, 4, 5};

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_cpu_seconds;  // 0: no runtime bound
  std::function<Outcome()> run;
};

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

Labels random_labels(std::size_t n, std::size_t c, Rng& rng) {
  Labels y(n);
  for (auto& v : y) v = static_cast<Label>(rng.below(c));
  return y;
}

// --- stacked arithmetic -----------------------------------------------------

Outcome stacked_arithmetic() {
  SynthConfig c;
  c.n_models = 7;
  c.n_classes = 100;
  c.n_train = 50000;
  c.n_test = 1;
  c.per_model_accuracy.assign(7, 0.5);
  c.seed = 1;
  const auto d = generate(c);
  const auto ds = build_stacked_dataset(d.train_blocks, d.train_labels);
  // Column count of the CSV form, label included.
  StackedDataset head = ds;
  head.features = take_rows(ds.features, std::vector<std::size_t>{0});
  head.labels.labels.resize(1);
  std::ostringstream csv;
  write_stacked_csv(head, csv);
  const std::string text = csv.str();
  const auto line_start = text.find('\n') + 1;
  const auto header = text.substr(line_start, text.find('\n', line_start) - line_start);
  const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  const bool ok = ds.n_samples() == 50000 && ds.n_features() == 700 && ds.feature_layout.size() == 700 &&
                  ds.labels.n_samples() == 50000 && columns == 701;
  return {ok, "rows " + std::to_string(ds.n_samples()) + ", features " + std::to_string(ds.n_features()) +
                  ", csv columns with target " + std::to_string(columns)};
}

// --- ridge ------------------------------------------------------------------

std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

Outcome ridge_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 50, p = 10, classes = 3;
    const Matrix x = random_matrix(n, p, rng, -2, 2);
    const Labels y = random_labels(n, classes, rng);
    const double alpha = std::pow(10.0, rng.uniform(-3, 1));
    const auto model = fit_ridge(x, y, classes, RidgeParams{alpha, "auto"});
    // Augmented normal equations with an unpenalized intercept.
    std::vector<std::vector<double>> a(p + 1, std::vector<double>(p + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = 0; k < p; ++k) a[j][k] += x(i, j) * x(i, k);
        a[j][p] += x(i, j);
        a[p][j] += x(i, j);
      }
    }
    a[p][p] = static_cast<double>(n);
    for (std::size_t j = 0; j < p; ++j) a[j][j] += alpha;
    double scale = 0.0, err = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      std::vector<double> rhs(p + 1, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double target = y[i] == c ? 1.0 : -1.0;
        for (std::size_t j = 0; j < p; ++j) rhs[j] += x(i, j) * target;
        rhs[p] += target;
      }
      const auto sol = gauss_solve(a, rhs);
      for (std::size_t j = 0; j < p; ++j) {
        scale = std::max(scale, std::abs(sol[j]));
        err = std::max(err, std::abs(model.weights()(j, c) - sol[j]));
      }
      scale = std::max(scale, std::abs(sol[p]));
      err = std::max(err, std::abs(model.intercept()[c] - sol[p]));
    }
    worst = std::max(worst, err / scale);
  }
  return {worst <= kRidgeRelTol, "max relative error " + fmt("%.3g", worst) + " over 20 instances"};
}

// --- knn --------------------------------------------------------------------

Outcome knn_equivalence() {
  Rng rng(77);
  const Matrix tx = random_matrix(500, 8, rng);
  const Labels ty = random_labels(500, 5, rng);
  const Matrix q = random_matrix(100, 8, rng);
  std::size_t mismatches = 0;
  for (std::size_t k : {1u, 5u, 20u}) {
    const auto pred = fit_knn(tx, ty, 5, KnnParams{k, NeighborWeights::uniform, "brute"}).predict(q);
    for (std::size_t i = 0; i < q.rows(); ++i) {
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t r = 0; r < tx.rows(); ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < 8; ++j) s += (tx(r, j) - q(i, j)) * (tx(r, j) - q(i, j));
        d.emplace_back(s, r);
      }
      std::sort(d.begin(), d.end());
      std::vector<int> votes(5, 0);
      for (std::size_t m = 0; m < k; ++m) ++votes[ty[d[m].second]];
      const auto want = static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
      mismatches += pred[i] != want;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 300 predictions"};
}

// --- majority vote ------------------------------------------------------------

Outcome vote_enumeration() {
  // Scores on a 0.25 grid: argmax ties and summed-score ties both occur, and
  // the sums are exact.
  Rng rng(5);
  std::size_t mismatches = 0, samples = 0, plurality_ties = 0;
  for (int f = 0; f < 1000; ++f) {
    const std::size_t n = 8, c = 3;
    std::vector<PredictionBlock> blocks;
    for (int m = 0; m < 5; ++m) {
      Matrix s(n, c);
      for (auto& v : s.data()) v = 0.25 * static_cast<double>(rng.below(5));
      blocks.push_back(PredictionBlock{"m" + std::to_string(m), "fixture", Split::test, ScoreKind::logits, s, {}});
    }
    LabelVector labels{"fixture", Split::test, c, random_labels(n, c, rng)};
    const auto got = majority_vote(blocks, labels);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<int> votes(c, 0);
      std::vector<double> sums(c, 0.0);
      for (const auto& b : blocks) {
        std::size_t top = 0;
        for (std::size_t k = 1; k < c; ++k)
          if (b.scores(i, k) > b.scores(i, top)) top = k;
        ++votes[top];
        for (std::size_t k = 0; k < c; ++k) sums[k] += b.scores(i, k);
      }
      // Enumerate the classes under the key (votes, summed score, -index).
      Label want = 0;
      for (Label k = 1; k < c; ++k) {
        if (std::make_pair(votes[k], sums[k]) > std::make_pair(votes[want], sums[want])) want = k;
      }
      const int top_votes = *std::max_element(votes.begin(), votes.end());
      plurality_ties += std::count(votes.begin(), votes.end(), top_votes) > 1;
      mismatches += got.predictions[i] != want;
      hits += want == labels.labels[i];
      ++samples;
    }
    if (got.accuracy != static_cast<double>(hits) / static_cast<double>(n)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over " + std::to_string(samples) +
                               " samples (" + std::to_string(plurality_ties) + " plurality ties)"};
}

// --- gradients ----------------------------------------------------------------

double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kGradRelFloor});
}

Outcome gradient_checks() {
  Rng rng(9);
  const double h = 1e-5;
  double worst_lr = 0.0, worst_mlp = 0.0;
  std::size_t lr_params = 0, mlp_params = 0;
  for (int t = 0; t < 5; ++t) {
    // Logistic: 4 features x 3 classes + 3 intercepts = 15 parameters.
    const Matrix x = random_matrix(12, 4, rng);
    const Labels y = random_labels(12, 3, rng);
    const Matrix w = random_matrix(4, 3, rng);
    std::vector<double> b{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Matrix gw;
    std::vector<double> gb;
    logistic_loss(x, y, w, b, 0.05, &gw, &gb);
    lr_params = w.data().size() + b.size();
    for (std::size_t j = 0; j < w.data().size(); ++j) {
      Matrix wp = w, wm = w;
      wp.data()[j] += h;
      wm.data()[j] -= h;
      const double fd =
          (logistic_loss(x, y, wp, b, 0.05, nullptr, nullptr) - logistic_loss(x, y, wm, b, 0.05, nullptr, nullptr)) /
          (2 * h);
      worst_lr = std::max(worst_lr, rel_error(gw.data()[j], fd));
    }
    for (std::size_t c = 0; c < b.size(); ++c) {
      auto bp = b, bm = b;
      bp[c] += h;
      bm[c] -= h;
      const double fd =
          (logistic_loss(x, y, w, bp, 0.05, nullptr, nullptr) - logistic_loss(x, y, w, bm, 0.05, nullptr, nullptr)) /
          (2 * h);
      worst_lr = std::max(worst_lr, rel_error(gb[c], fd));
    }

    // MLP: 2 -> 3 -> 2 is 17 parameters.
    for (Activation act : {Activation::tanh, Activation::logistic}) {
      const Matrix xm = random_matrix(10, 2, rng);
      const Labels ym = random_labels(10, 2, rng);
      auto net = MlpNetwork::initialize(2, std::vector<std::size_t>{3}, 2, act, rng, false);
      mlp_params = net.parameter_count();
      std::vector<double> grad;
      net.loss(xm, ym, 0.01, &grad);
      const auto theta = net.flat_parameters();
      for (std::size_t j = 0; j < theta.size(); ++j) {
        auto tp = theta, tm = theta;
        tp[j] += h;
        tm[j] -= h;
        net.set_flat_parameters(tp);
        const double fp = net.loss(xm, ym, 0.01, nullptr);
        net.set_flat_parameters(tm);
        const double fm = net.loss(xm, ym, 0.01, nullptr);
        worst_mlp = std::max(worst_mlp, rel_error(grad[j], (fp - fm) / (2 * h)));
      }
    }
  }
  const bool ok = worst_lr <= kGradRelTol && worst_mlp <= kGradRelTol && lr_params <= 20 && mlp_params <= 20;
  return {ok, "logistic " + fmt("%.3g", worst_lr) + " (" + std::to_string(lr_params) + " params), mlp " +
                  fmt("%.3g", worst_mlp) + " (" + std::to_string(mlp_params) + " params)"};
}

// --- synthetic suite ------------------------------------------------------------

ExperimentInputs suite_inputs(std::uint64_t seed) {
  SynthConfig c;
  c.n_models = 11;
  c.n_classes = 10;
  c.n_train = 10000;
  c.n_test = 2000;
  c.per_model_accuracy = uniform_accuracies(11, 0.55, 0.80, seed);
  c.error_correlation = 0.2;
  c.seed = seed;
  auto d = generate(c);
  return ExperimentInputs{std::move(d.train_blocks), std::move(d.test_blocks), std::move(d.train_labels),
                          std::move(d.test_labels)};
}

ExperimentReport suite_run(std::uint64_t seed, std::vector<Algorithm> algorithms) {
  ExperimentConfig cfg;
  cfg.ensemble_sizes = {3, 7, 11};
  cfg.repetitions = 10;
  cfg.algorithms = std::move(algorithms);
  cfg.seed = seed;
  return run_experiment(cfg, suite_inputs(seed));
}

Outcome ml_beats_baselines() {
  bool ok = true;
  std::string detail;
  for (auto seed : kSuiteSeeds) {
    const auto r = suite_run(seed, {Algorithm::RG, Algorithm::KN});
    int net = 0, maj = 0;
    for (const auto& c : r.cells) {
      net += c.best_ml && c.best_ml->score > c.net_score;
      maj += c.best_ml && c.best_ml->score > c.maj_score;
    }
    ok = ok && net >= kFindingMinBeatsNet && maj >= kFindingMinBeatsMaj;
    detail += "seed " + std::to_string(seed) + ": >Net " + std::to_string(net) + "/30, >Maj " + std::to_string(maj) +
              "/30; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome ridge_knn_dominance() {
  std::size_t cells = 0, tagged = 0, tied_in = 0;
  std::map<std::string, std::size_t> tags;
  std::string per_seed;
  for (auto seed : kSuiteSeeds) {
    const auto r = suite_run(seed, {kAllAlgorithms.begin(), kAllAlgorithms.end()});
    std::size_t seed_tagged = 0;
    for (const auto& c : r.cells) {
      ++cells;
      if (c.winner != Winner::ML) continue;
      const auto tag = c.best_ml->algorithm;
      ++tags[std::string(algorithm_tag(tag))];
      if (tag == Algorithm::RG || tag == Algorithm::KN) {
        ++tagged;
        ++seed_tagged;
      }
      // Diagnostic only: RG or KN reached the best score but lost the tie.
      for (const auto& s : c.ml_scores) {
        if ((s.algorithm == Algorithm::RG || s.algorithm == Algorithm::KN) && s.valid() &&
            s.accuracy == c.best_ml->score) {
          ++tied_in;
          break;
        }
      }
    }
    per_seed += " " + std::to_string(seed_tagged);
  }
  const double share = static_cast<double>(tagged) / static_cast<double>(cells);
  std::string tag_list;
  for (const auto& [k, v] : tags) tag_list += " " + k + "=" + std::to_string(v);
  return {share >= kDominanceMinShare,
          "RG/KN tag " + std::to_string(tagged) + "/" + std::to_string(cells) + " = " + fmt("%.1f%%", 100 * share) +
              " (per seed:" + per_seed + "); wins by tag:" + tag_list + "; RG or KN at the best score in " +
              std::to_string(tied_in) + " cells"};
}

// --- hyperparameter bounds --------------------------------------------------------

bool in_set(const HyperValue& v, std::initializer_list<const char*> names) {
  const auto* s = std::get_if<std::string>(&v);
  return s && std::any_of(names.begin(), names.end(), [&](const char* n) { return *s == n; });
}

bool is_bool(const HyperValue& v) { return std::holds_alternative<bool>(v); }

bool real_in(const HyperValue& v, double lo, double hi) {
  const auto* d = std::get_if<double>(&v);
  return d && *d >= lo && *d <= hi;
}

bool int_in(const HyperValue& v, std::int64_t lo, std::int64_t hi) {
  const auto* i = std::get_if<std::int64_t>(&v);
  return i && *i >= lo && *i <= hi;
}

// Documented search ranges, written out independently of the tuner's tables.
bool within_documented_ranges(Algorithm a, const Hyperparams& hp) {
  auto has = [&](std::initializer_list<const char*> keys) {
    if (hp.size() != keys.size()) return false;
    return std::all_of(keys.begin(), keys.end(), [&](const char* k) { return hp.contains(k); });
  };
  switch (a) {
    case Algorithm::SG:
      return has({"alpha", "penalty"}) && real_in(hp.at("alpha"), 1e-5, 1.0) &&
             in_set(hp.at("penalty"), {"l2", "l1", "elasticnet"});
    case Algorithm::PA:
      return has({"C", "fit_intercept", "shuffle"}) && real_in(hp.at("C"), 1e-2, 10.0) &&
             is_bool(hp.at("fit_intercept")) && is_bool(hp.at("shuffle"));
    case Algorithm::RG:
      return has({"alpha", "solver"}) && real_in(hp.at("alpha"), 1e-3, 10.0) &&
             in_set(hp.at("solver"), {"auto", "svd", "cholesky", "lsqr", "sparse_cg", "sag", "saga"});
    case Algorithm::LR:
      return has({"penalty", "solver"}) && in_set(hp.at("penalty"), {"l1", "l2"}) &&
             in_set(hp.at("solver"), {"liblinear", "saga"});
    case Algorithm::KN:
      return has({"weights", "algorithm", "n_neighbors"}) && in_set(hp.at("weights"), {"uniform", "distance"}) &&
             in_set(hp.at("algorithm"), {"auto", "ball_tree", "kd_tree", "brute"}) &&
             int_in(hp.at("n_neighbors"), 2, 20);
    case Algorithm::RF:
      return has({"n_estimators", "min_weight_fraction_leaf", "max_features"}) &&
             int_in(hp.at("n_estimators"), 10, 1000) && real_in(hp.at("min_weight_fraction_leaf"), 0.0, 0.5) &&
             in_set(hp.at("max_features"), {"auto", "sqrt", "log2"});
    case Algorithm::MP:
      // Two to five layers of 64.
      return has({"activation", "solver", "hidden_layer_sizes"}) &&
             in_set(hp.at("activation"), {"identity", "logistic", "tanh", "relu"}) &&
             in_set(hp.at("solver"), {"lbfgs", "sgd", "adam"}) &&
             in_set(hp.at("hidden_layer_sizes"), {"64,64", "64,64,64", "64,64,64,64", "64,64,64,64,64"});
  }
  return false;
}

Outcome hyperparameter_bounds() {
  std::size_t outside = 0;
  std::set<std::int64_t> k_seen;
  for (Algorithm a : kAllAlgorithms) {
    const auto space = builtin_space(a);
    for (std::size_t t = 0; t < 1000; ++t) {
      const auto hp = sample(space, 42, t);
      outside += !within_documented_ranges(a, hp);
      if (a == Algorithm::KN) k_seen.insert(std::get<std::int64_t>(hp.at("n_neighbors")));
    }
  }
  const bool endpoints = k_seen.contains(2) && k_seen.contains(20);
  return {outside == 0 && endpoints, std::to_string(outside) + " of 7000 samples outside; n_neighbors endpoints " +
                                         (endpoints ? "observed" : "missing")};
}

// --- determinism ------------------------------------------------------------------

Outcome determinism() {
  namespace fs = std::filesystem;
  SynthConfig sc;
  sc.n_models = 11;
  sc.n_classes = 5;
  sc.n_train = 400;
  sc.n_test = 200;
  sc.per_model_accuracy = uniform_accuracies(11, 0.55, 0.8, 8);
  sc.error_correlation = 0.2;
  sc.seed = 8;
  const auto dir = fs::temp_directory_path() / ("dgold-accept-" + std::to_string(::getpid()));
  write_synth(generate(sc), dir);
  ExperimentConfig cfg;
  cfg.block_directory = dir;
  cfg.repetitions = 2;
  cfg.seed = 8;
  const auto a = run_experiment(cfg), b = run_experiment(cfg);
  fs::remove_all(dir);
  const bool csv = emit_report(a, ReportFormat::csv) == emit_report(b, ReportFormat::csv);
  const bool json = emit_report(a, ReportFormat::json) == emit_report(b, ReportFormat::json);
  return {csv && json, std::string("csv ") + (csv ? "identical" : "differs") + ", json " +
                           (json ? "identical" : "differs") + " (" + std::to_string(a.cells.size()) +
                           " cells, 7 learners)"};
}

// --- head plan --------------------------------------------------------------------

Outcome head_plan() {
  const auto p = fbl_head_plan(600, 100);
  const bool ok = p.hidden_widths == std::vector<std::size_t>{512, 256, 128} && p.out_classes == 100;
  std::string s = "600";
  for (auto w : p.hidden_widths) s += " -> " + std::to_string(w);
  return {ok, s + " -> " + std::to_string(p.out_classes)};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"stacked_arithmetic", kStackedBudget, stacked_arithmetic},
      {"ridge_oracle", kRidgeBudget, ridge_oracle},
      {"knn_equivalence", kKnnBudget, knn_equivalence},
      {"vote_enumeration", kVoteBudget, vote_enumeration},
      {"gradient_checks", kGradBudget, gradient_checks},
      {"ml_beats_baselines", kFindingBudget, ml_beats_baselines},
      {"ridge_knn_dominance", kDominanceBudget, ridge_knn_dominance},
      {"hyperparameter_bounds", kBoundsBudget, hyperparameter_bounds},
      {"determinism", 0.0, determinism},
      {"head_plan", 0.0, head_plan},
  };
  return all;
}

bool run_one(const Criterion& c) {
  const double start = cpu_seconds();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double used = cpu_seconds() - start;
  const bool in_budget = c.budget_cpu_seconds == 0.0 || used < c.budget_cpu_seconds;
  const bool pass = o.pass && in_budget;
  std::string timing = fmt("%.1fs cpu", used);
  if (c.budget_cpu_seconds > 0.0) timing += fmt(" / budget %.0fs", c.budget_cpu_seconds);
  if (!in_budget) timing += " OVER BUDGET";
  std::printf("%s %s: %s [%s]\n", pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), timing.c_str());
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.size() == 1 && args[0] == "--list") {
    for (const auto& c : criteria()) std::printf("%s\n", c.name.c_str());
    return 0;
  }
  std::vector<const Criterion*> chosen;
  if (args.empty()) {
    for (const auto& c : criteria()) chosen.push_back(&c);
  } else if (args.size() == 2 && args[0] == "--criterion") {
    for (const auto& c : criteria())
      if (c.name == args[1]) chosen.push_back(&c);
    if (chosen.empty()) {
      std::fprintf(stderr, "unknown criterion '%s'\n", args[1].c_str());
      return 2;
    }
  } else {
    std::fprintf(stderr, "usage: %s [--list | --criterion NAME]\n", argv[0]);
    return 2;
  }
  bool all = true;
  for (const auto* c : chosen) all = run_one(*c) && all;
  return all ? 0 : 1;
}
