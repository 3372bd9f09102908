#include "dgold/classifiers/common.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "dgold/error.hpp"

namespace dgold {

std::string_view algorithm_tag(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::SG: return "SG";
    case Algorithm::PA: return "PA";
    case Algorithm::RG: return "RG";
    case Algorithm::LR: return "LR";
    case Algorithm::KN: return "KN";
    case Algorithm::RF: return "RF";
    case Algorithm::MP: return "MP";
  }
  return "??";
}

Algorithm parse_algorithm(std::string_view tag) {
  std::string upper(tag);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto a : kAllAlgorithms)
    if (algorithm_tag(a) == upper) return a;
  throw ConfigError("unknown algorithm tag '" + std::string(tag) + "' (expected one of SG, PA, RG, LR, KN, RF, MP)");
}

std::string to_string(const HyperValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.17g", x);
          return buf;
        } else {
          return x;
        }
      },
      v);
}

void TrainOptions::validate() const {
  if (max_epochs && *max_epochs < 1) throw FitError("max_epochs must be at least 1");
  if (!(tolerance > 0.0)) throw FitError("tolerance must be positive");
}

Labels FittedModel::predict(const Matrix& features) const {
  if (features.cols() != n_features_) {
    throw ShapeError("predict: model expects " + std::to_string(n_features_) + " features, got " +
                     std::to_string(features.cols()));
  }
  return predict_rows(features);
}

void check_training_data(const Matrix& x, std::span<const Label> y, std::size_t n_classes) {
  if (x.rows() == 0 || x.cols() == 0) throw FitError("training set is empty");
  if (x.rows() != y.size()) {
    throw FitError("training set has " + std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) +
                   " labels");
  }
  if (n_classes < 1) throw FitError("n_classes must be positive");
  for (Label l : y)
    if (l >= n_classes) throw FitError("training label " + std::to_string(l) + " exceeds n_classes");
  if (!x.all_finite()) throw FitError("training features must be finite");
}

namespace {

const HyperValue* find(const Hyperparams& hp, const std::string& key) {
  const auto it = hp.find(key);
  return it == hp.end() ? nullptr : &it->second;
}

}  // namespace

double hp_real(const Hyperparams& hp, const std::string& key, double fallback) {
  const auto* v = find(hp, key);
  if (!v) return fallback;
  if (const auto* d = std::get_if<double>(v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
  throw FitError("hyperparameter '" + key + "' must be numeric");
}

std::int64_t hp_int(const Hyperparams& hp, const std::string& key, std::int64_t fallback) {
  const auto* v = find(hp, key);
  if (!v) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  if (const auto* d = std::get_if<double>(v); d && std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
  throw FitError("hyperparameter '" + key + "' must be an integer");
}

bool hp_bool(const Hyperparams& hp, const std::string& key, bool fallback) {
  const auto* v = find(hp, key);
  if (!v) return fallback;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  if (const auto* s = std::get_if<std::string>(v)) {
    if (*s == "true" || *s == "True") return true;
    if (*s == "false" || *s == "False") return false;
  }
  throw FitError("hyperparameter '" + key + "' must be a boolean");
}

std::string hp_string(const Hyperparams& hp, const std::string& key, const std::string& fallback) {
  const auto* v = find(hp, key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  throw FitError("hyperparameter '" + key + "' must be a string");
}

void hp_check_keys(const Hyperparams& hp, std::span<const std::string_view> known, std::string_view learner) {
  for (const auto& [key, _] : hp) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw FitError("unknown hyperparameter '" + key + "' for " + std::string(learner));
    }
  }
}

}  // namespace dgold
