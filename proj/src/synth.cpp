#include "dgold/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dgold/error.hpp"
#include "dgold/parallel.hpp"
#include "dgold/random.hpp"
#include "dgold/stacker.hpp"

namespace dgold {

void SynthConfig::validate() const {
  if (n_train == 0 || n_test == 0) throw ConfigError("synth: n_train and n_test must be positive");
  if (n_classes < 2) throw ConfigError("synth: n_classes must be at least 2");
  if (n_models == 0) throw ConfigError("synth: n_models must be positive");
  if (per_model_accuracy.size() != n_models) {
    throw ConfigError("synth: expected " + std::to_string(n_models) + " accuracies, got " +
                      std::to_string(per_model_accuracy.size()));
  }
  const double chance = 1.0 / static_cast<double>(n_classes);
  for (double a : per_model_accuracy) {
    if (!(a > chance && a <= 1.0)) {
      throw ConfigError("synth: accuracy " + std::to_string(a) + " is not above chance " + std::to_string(chance) +
                        " or exceeds 1");
    }
  }
  if (!(error_correlation >= 0.0 && error_correlation <= 1.0)) {
    throw ConfigError("synth: error_correlation must lie in [0, 1]");
  }
  if (!(temperature > 0.0 && std::isfinite(temperature))) throw ConfigError("synth: temperature must be positive");
  if (!(runner_up_hint >= 0.0 && runner_up_hint <= 1.0)) throw ConfigError("synth: runner_up_hint must lie in [0, 1]");
}

std::string synth_model_name(std::size_t m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "synth-%02zu", m);
  return buf;
}

std::vector<double> uniform_accuracies(std::size_t n, double lo, double hi, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0xacc}));
  std::vector<double> out(n);
  for (auto& a : out) a = rng.uniform(lo, hi);
  return out;
}

namespace {

// Uniform wrong class for label y.
Label wrong_class(Rng& rng, Label y, std::size_t n_classes) {
  auto k = static_cast<Label>(rng.below(n_classes - 1));
  return k >= y ? k + 1 : k;
}

struct SplitShared {
  Labels labels;
  std::vector<double> latent;
  Labels confuser;
};

SplitShared shared_draws(const SynthConfig& cfg, std::size_t n, std::uint64_t split_id) {
  Rng rng(derive_seed(cfg.seed, {split_id, 0}));
  SplitShared s;
  s.labels.resize(n);
  s.latent.resize(n);
  s.confuser.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.labels[i] = static_cast<Label>(rng.below(cfg.n_classes));
    s.latent[i] = rng.uniform();
    s.confuser[i] = wrong_class(rng, s.labels[i], cfg.n_classes);
  }
  return s;
}

Matrix model_scores(const SynthConfig& cfg, const SplitShared& s, std::size_t m, std::uint64_t split_id) {
  const std::size_t n = s.labels.size(), c = cfg.n_classes;
  Rng rng(derive_seed(cfg.seed, {split_id, 1, m}));
  const double acc = cfg.per_model_accuracy[m];
  Matrix scores(n, c);
  std::vector<double> g(c);
  for (std::size_t i = 0; i < n; ++i) {
    const Label y = s.labels[i];
    const bool shared = rng.bernoulli(cfg.error_correlation);
    const double u = shared ? s.latent[i] : rng.uniform();
    const bool correct = u < acc;
    Label top = y;
    if (!correct) top = shared ? s.confuser[i] : wrong_class(rng, y, c);

    for (auto& v : g) v = rng.normal();
    if (!correct && rng.bernoulli(cfg.runner_up_hint)) {
      double runner = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c; ++j)
        if (j != top && j != y) runner = std::max(runner, g[j]);
      if (c == 2) runner = g[y];
      g[y] = std::max(g[y], runner + 0.25 * std::abs(rng.normal()));
    }
    double rest = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j)
      if (j != top) rest = std::max(rest, g[j]);
    const double gap = correct ? 1.0 + std::abs(rng.normal()) : 0.1 + 0.5 * std::abs(rng.normal());
    g[top] = rest + gap;

    double mx = g[top], sum = 0.0;
    auto row = scores.row(i);
    for (std::size_t j = 0; j < c; ++j) sum += std::exp((g[j] - mx) / cfg.temperature);
    const double log_sum = std::log(sum);
    for (std::size_t j = 0; j < c; ++j) {
      const double logp = (g[j] - mx) / cfg.temperature - log_sum;
      row[j] = cfg.score_kind == ScoreKind::probs ? std::exp(logp) : logp;
    }
  }
  return round_to_float32(scores);
}

}  // namespace

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthData out;
  out.train_blocks.resize(cfg.n_models);
  out.test_blocks.resize(cfg.n_models);
  out.realized_test_accuracy.resize(cfg.n_models);
  const SplitShared train = shared_draws(cfg, cfg.n_train, 0);
  const SplitShared test = shared_draws(cfg, cfg.n_test, 1);

  parallel_for(cfg.n_models, [&](std::size_t m) {
    PredictionBlock tr{synth_model_name(m), cfg.dataset_name, Split::train, cfg.score_kind,
                       model_scores(cfg, train, m, 0), std::nullopt};
    PredictionBlock te{synth_model_name(m), cfg.dataset_name, Split::test, cfg.score_kind,
                       model_scores(cfg, test, m, 1), std::nullopt};
    const double acc = accuracy(argmax_rows(te.scores), test.labels);
    tr.solo_test_accuracy = acc;
    te.solo_test_accuracy = acc;
    out.realized_test_accuracy[m] = acc;
    out.train_blocks[m] = std::move(tr);
    out.test_blocks[m] = std::move(te);
  });
  out.train_labels = {cfg.dataset_name, Split::train, cfg.n_classes, train.labels};
  out.test_labels = {cfg.dataset_name, Split::test, cfg.n_classes, test.labels};
  return out;
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  for (const auto* blocks : {&data.train_blocks, &data.test_blocks}) {
    for (const auto& b : *blocks) {
      write_block_file(b, dir / (b.model_name + "." + std::string(to_string(b.split)) + ".l1pf"));
    }
  }
  for (const auto* l : {&data.train_labels, &data.test_labels}) {
    write_labels_file(*l, dir / ("labels." + std::string(to_string(l->split)) + ".l1lb"));
  }
}

}  // namespace dgold
