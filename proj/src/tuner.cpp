#include "dgold/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>

#include "dgold/error.hpp"
#include "dgold/random.hpp"

namespace dgold {

std::string_view to_string(ParamKind k) noexcept {
  switch (k) {
    case ParamKind::real_uniform: return "real-uniform";
    case ParamKind::real_log_uniform: return "real-log-uniform";
    case ParamKind::int_uniform: return "integer-uniform";
    case ParamKind::categorical: return "categorical";
  }
  return "categorical";
}

bool ParamSpec::contains(const HyperValue& v) const {
  switch (kind) {
    case ParamKind::real_uniform:
    case ParamKind::real_log_uniform: {
      const auto* d = std::get_if<double>(&v);
      return d && *d >= low && *d <= high;
    }
    case ParamKind::int_uniform: {
      const auto* i = std::get_if<std::int64_t>(&v);
      return i && static_cast<double>(*i) >= low && static_cast<double>(*i) <= high;
    }
    case ParamKind::categorical: return std::find(choices.begin(), choices.end(), v) != choices.end();
  }
  return false;
}

void HyperparamSpace::validate() const {
  for (const auto& e : entries) {
    if (e.kind == ParamKind::categorical) {
      if (e.choices.empty()) throw ConfigError("parameter '" + e.name + "' has no choices");
      continue;
    }
    if (!(e.low < e.high)) throw ConfigError("parameter '" + e.name + "' needs low < high");
    if (e.kind == ParamKind::real_log_uniform && !(e.low > 0.0)) {
      throw ConfigError("log-uniform parameter '" + e.name + "' needs a positive lower bound");
    }
    if (e.kind == ParamKind::int_uniform && (e.low != std::floor(e.low) || e.high != std::floor(e.high))) {
      throw ConfigError("integer parameter '" + e.name + "' needs integer bounds");
    }
  }
}

bool HyperparamSpace::contains(const Hyperparams& hp) const {
  return std::all_of(entries.begin(), entries.end(), [&](const ParamSpec& e) {
    const auto it = hp.find(e.name);
    return it != hp.end() && e.contains(it->second);
  });
}

namespace {

ParamSpec log_real(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::real_log_uniform, lo, hi, {}};
}
ParamSpec real(std::string name, double lo, double hi) { return {std::move(name), ParamKind::real_uniform, lo, hi, {}}; }
ParamSpec integer(std::string name, double lo, double hi) {
  return {std::move(name), ParamKind::int_uniform, lo, hi, {}};
}
ParamSpec strings(std::string name, std::initializer_list<const char*> values) {
  ParamSpec p{std::move(name), ParamKind::categorical, 0, 0, {}};
  for (const char* v : values) p.choices.emplace_back(std::string(v));
  return p;
}
ParamSpec flags(std::string name) { return {std::move(name), ParamKind::categorical, 0, 0, {true, false}}; }

}  // namespace

HyperparamSpace builtin_space(Algorithm algorithm) {
  HyperparamSpace s{algorithm, {}};
  switch (algorithm) {
    case Algorithm::SG:
      s.entries = {log_real("alpha", 1e-5, 1.0), strings("penalty", {"l2", "l1", "elasticnet"})};
      break;
    case Algorithm::PA:
      s.entries = {log_real("C", 1e-2, 10.0), flags("fit_intercept"), flags("shuffle")};
      break;
    case Algorithm::RG:
      s.entries = {log_real("alpha", 1e-3, 10.0),
                   strings("solver", {"auto", "svd", "cholesky", "lsqr", "sparse_cg", "sag", "saga"})};
      break;
    case Algorithm::LR:
      s.entries = {strings("penalty", {"l1", "l2"}), strings("solver", {"liblinear", "saga"})};
      break;
    case Algorithm::KN:
      s.entries = {strings("weights", {"uniform", "distance"}),
                   strings("algorithm", {"auto", "ball_tree", "kd_tree", "brute"}), integer("n_neighbors", 2, 20)};
      break;
    case Algorithm::RF:
      s.entries = {integer("n_estimators", 10, 1000), real("min_weight_fraction_leaf", 0.0, 0.5),
                   strings("max_features", {"auto", "sqrt", "log2"})};
      break;
    case Algorithm::MP:
      s.entries = {strings("activation", {"identity", "logistic", "tanh", "relu"}),
                   strings("solver", {"lbfgs", "sgd", "adam"}),
                   strings("hidden_layer_sizes", {"64,64", "64,64,64", "64,64,64,64", "64,64,64,64,64"})};
      break;
  }
  return s;
}

Hyperparams sample(const HyperparamSpace& space, std::uint64_t seed, std::size_t trial) {
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(trial)}));
  Hyperparams out;
  for (const auto& e : space.entries) {
    switch (e.kind) {
      case ParamKind::real_uniform:
        out[e.name] = std::min(e.high, rng.uniform(e.low, e.high));
        break;
      case ParamKind::real_log_uniform: {
        const double v = std::pow(10.0, rng.uniform(std::log10(e.low), std::log10(e.high)));
        out[e.name] = std::clamp(v, e.low, e.high);
        break;
      }
      case ParamKind::int_uniform: {
        const auto lo = static_cast<std::int64_t>(e.low);
        const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(e.high) - lo) + 1;
        out[e.name] = lo + static_cast<std::int64_t>(rng.below(span));
        break;
      }
      case ParamKind::categorical:
        out[e.name] = e.choices[rng.below(e.choices.size())];
        break;
    }
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(std::span<const Label> labels,
                                                                               std::size_t n_classes,
                                                                               double val_fraction,
                                                                               std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_classes) throw ConfigError("label out of range in stratified split");
    by_class[labels[i]].push_back(i);
  }
  std::vector<std::size_t> fit_rows, val_rows;
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    Rng rng(derive_seed(seed, {0x5917u, c}));
    rng.shuffle(rows);
    auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(rows.size()) + 0.5));
    n_val = std::min(n_val, rows.size() - 1);
    val_rows.insert(val_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_val));
    fit_rows.insert(fit_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_val), rows.end());
  }
  if (val_rows.empty()) throw ConfigError("stratified split left no validation rows");
  std::sort(fit_rows.begin(), fit_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  return {std::move(fit_rows), std::move(val_rows)};
}

SearchResult search(const StackedDataset& train, Algorithm algorithm, const SearchOptions& opts) {
  return search(train, builtin_space(algorithm), opts);
}

SearchResult search(const StackedDataset& train, const HyperparamSpace& space, const SearchOptions& opts) {
  if (opts.n_trials == 0) throw ConfigError("n_trials must be at least 1");
  space.validate();
  const auto& y = train.labels.labels;
  const auto [fit_rows, val_rows] = stratified_split(y, train.n_classes(), opts.val_fraction, opts.seed);
  const Matrix x_fit = take_rows(train.features, fit_rows);
  const Matrix x_val = take_rows(train.features, val_rows);
  Labels y_fit(fit_rows.size()), y_val(val_rows.size());
  for (std::size_t i = 0; i < fit_rows.size(); ++i) y_fit[i] = y[fit_rows[i]];
  for (std::size_t i = 0; i < val_rows.size(); ++i) y_val[i] = y[val_rows[i]];

  auto train_options = [&](std::size_t trial) {
    TrainOptions t;
    t.seed = derive_seed(opts.seed, {0x7121u, trial});
    t.max_epochs = opts.max_epochs;
    t.timeout = opts.timeout;
    return t;
  };

  SearchResult result;
  result.trials.reserve(opts.n_trials);
  for (std::size_t trial = 0; trial < opts.n_trials; ++trial) {
    TrialResult tr;
    tr.trial_index = trial;
    tr.sampled = sample(space, opts.seed, trial);
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto model = fit(space.algorithm, x_fit, y_fit, train.n_classes(), tr.sampled, train_options(trial));
      if (model->timed_out()) {
        tr.timed_out = true;
      } else {
        tr.validation_accuracy = accuracy(model->predict(x_val), y_val);
      }
    } catch (const Error& e) {
      tr.failed = true;
      tr.error = e.what();
    }
    tr.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trials.push_back(std::move(tr));
  }
  std::size_t best = 0;
  for (std::size_t t = 1; t < result.trials.size(); ++t) {
    if (result.trials[t].validation_accuracy > result.trials[best].validation_accuracy) best = t;
  }
  result.best = result.trials[best];
  result.model = fit(space.algorithm, train, result.best.sampled, train_options(best));
  result.refit_timed_out = result.model->timed_out();
  return result;
}

std::string trial_log_json(const SearchResult& result, Algorithm algorithm, bool include_timing) {
  auto params = [](const Hyperparams& hp) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : hp) std::visit([&, &k = k](const auto& x) { j[k] = x; }, v);
    return j;
  };
  auto trial = [&](const TrialResult& t) {
    nlohmann::json j = {{"trial", t.trial_index},
                        {"params", params(t.sampled)},
                        {"validation_accuracy", t.validation_accuracy},
                        {"failed", t.failed},
                        {"timed_out", t.timed_out}};
    if (!t.error.empty()) j["error"] = t.error;
    if (include_timing) j["fit_seconds"] = t.fit_seconds;
    return j;
  };
  nlohmann::json log = {{"algorithm", std::string(algorithm_tag(algorithm))},
                        {"best", trial(result.best)},
                        {"refit_timed_out", result.refit_timed_out},
                        {"trials", nlohmann::json::array()}};
  for (const auto& t : result.trials) log["trials"].push_back(trial(t));
  return log.dump(2) + "\n";
}

}  // namespace dgold
