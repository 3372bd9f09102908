#pragma once

#include <string>
#include <vector>

#include "dgold/l1pf.hpp"
#include "dgold/matrix.hpp"
#include "dgold/random.hpp"

namespace dgold::testutil {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = rng.uniform(lo, hi);
  return m;
}

inline Labels random_labels(std::size_t n, std::size_t n_classes, Rng& rng) {
  Labels y(n);
  for (auto& v : y) v = static_cast<Label>(rng.below(n_classes));
  return y;
}

/// Probability block with float32-exact rows.
inline PredictionBlock random_prob_block(const std::string& model, std::size_t n, std::size_t c, Rng& rng,
                                         Split split = Split::train, const std::string& dataset = "toy") {
  Matrix s(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (auto& v : s.row(i)) sum += (v = rng.uniform(0.01, 1.0));
    for (auto& v : s.row(i)) v /= sum;
  }
  return PredictionBlock{model, dataset, split, ScoreKind::probs, round_to_float32(s), std::nullopt};
}

/// Two Gaussian-ish blobs per class centred on distinct corners.
inline void blobs(std::size_t n, std::size_t p, std::size_t n_classes, double spread, Rng& rng, Matrix& x,
                  Labels& y) {
  x = Matrix(n, p);
  y = Labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<Label>(i % n_classes);
    y[i] = c;
    for (std::size_t j = 0; j < p; ++j) x(i, j) = (j % n_classes == c ? 2.0 : 0.0) + spread * rng.normal();
  }
}

}  // namespace dgold::testutil
