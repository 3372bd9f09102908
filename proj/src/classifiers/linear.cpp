#include "dgold/classifiers/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dgold/error.hpp"
#include "dgold/random.hpp"

namespace dgold {

LinearModel::LinearModel(Algorithm algorithm, Hyperparams hp, Matrix weights, std::vector<double> intercept)
    : FittedModel(std::move(hp), weights.cols(), weights.rows()),
      algorithm_(algorithm),
      weights_(std::move(weights)),
      intercept_(std::move(intercept)) {
  if (intercept_.size() != weights_.cols()) throw ShapeError("intercept length must equal the class count");
}

Matrix LinearModel::decision_function(const Matrix& features) const {
  if (features.cols() != n_features()) throw ShapeError("decision_function: feature count mismatch");
  Matrix z = matmul(features, weights_);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] += intercept_[k];
  }
  return z;
}

void LinearModel::set_training_trace(std::vector<double> curve, std::size_t iterations, bool timed_out) {
  loss_curve_ = std::move(curve);
  iterations_ = iterations;
  if (timed_out) mark_timed_out();
}

Labels LinearModel::predict_rows(const Matrix& features) const { return argmax_rows(decision_function(features)); }

namespace {

// Per-class weight rows (C x p) are convenient during per-sample training;
// the model stores the transpose.
LinearModel make_linear(Algorithm a, Hyperparams hp, const std::vector<std::vector<double>>& w_rows,
                        std::vector<double> b, std::size_t p) {
  Matrix w(p, w_rows.size());
  for (std::size_t c = 0; c < w_rows.size(); ++c)
    for (std::size_t j = 0; j < p; ++j) w(j, c) = w_rows[c][j];
  return LinearModel(a, std::move(hp), std::move(w), std::move(b));
}

constexpr std::string_view kRidgeKeys[] = {"alpha", "solver"};
constexpr std::string_view kSgdKeys[] = {"alpha", "penalty", "l1_ratio", "fit_intercept", "shuffle"};
constexpr std::string_view kPaKeys[] = {"C", "fit_intercept", "shuffle"};
constexpr std::string_view kLogisticKeys[] = {"penalty", "C", "fit_intercept", "solver"};

}  // namespace

// ---------------------------------------------------------------------------
// Ridge

RidgeParams RidgeParams::from(const Hyperparams& hp) {
  hp_check_keys(hp, kRidgeKeys, "RG");
  RidgeParams p;
  p.alpha = hp_real(hp, "alpha", p.alpha);
  p.solver = hp_string(hp, "solver", p.solver);
  return p;
}

Hyperparams RidgeParams::to_hyperparams() const { return {{"alpha", alpha}, {"solver", solver}}; }

LinearModel fit_ridge(const Matrix& x, std::span<const Label> y, std::size_t n_classes, const RidgeParams& params) {
  check_training_data(x, y, n_classes);
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha)) throw FitError("ridge alpha must be positive");
  const std::size_t n = x.rows(), p = x.cols();

  std::vector<double> mean_x(p, 0.0), mean_y(n_classes, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < p; ++j) mean_x[j] += r[j];
  }
  for (auto& m : mean_x) m /= static_cast<double>(n);

  Matrix xc(n, p), targets(n, n_classes);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = x.row(i);
    auto dst = xc.row(i);
    for (std::size_t j = 0; j < p; ++j) dst[j] = src[j] - mean_x[j];
    for (std::size_t c = 0; c < n_classes; ++c) targets(i, c) = (y[i] == c) ? 1.0 : -1.0;
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < n; ++i) mean_y[c] += targets(i, c);
    mean_y[c] /= static_cast<double>(n);
  }

  Matrix gram = matmul_tn(xc, xc);
  for (std::size_t j = 0; j < p; ++j) gram(j, j) += params.alpha;
  Matrix w = spd_solve(gram, matmul_tn(xc, targets));

  std::vector<double> b(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double s = mean_y[c];
    for (std::size_t j = 0; j < p; ++j) s -= mean_x[j] * w(j, c);
    b[c] = s;
  }
  return LinearModel(Algorithm::RG, params.to_hyperparams(), std::move(w), std::move(b));
}

// ---------------------------------------------------------------------------
// SGD

Penalty parse_penalty(std::string_view s) {
  if (s == "l2") return Penalty::l2;
  if (s == "l1") return Penalty::l1;
  if (s == "elasticnet") return Penalty::elasticnet;
  throw FitError("unknown penalty '" + std::string(s) + "'");
}

std::string_view to_string(Penalty p) noexcept {
  switch (p) {
    case Penalty::l2: return "l2";
    case Penalty::l1: return "l1";
    case Penalty::elasticnet: return "elasticnet";
  }
  return "l2";
}

SgdParams SgdParams::from(const Hyperparams& hp) {
  hp_check_keys(hp, kSgdKeys, "SG");
  SgdParams p;
  p.alpha = hp_real(hp, "alpha", p.alpha);
  p.penalty = parse_penalty(hp_string(hp, "penalty", "l2"));
  p.l1_ratio = hp_real(hp, "l1_ratio", p.l1_ratio);
  p.fit_intercept = hp_bool(hp, "fit_intercept", p.fit_intercept);
  p.shuffle = hp_bool(hp, "shuffle", p.shuffle);
  return p;
}

Hyperparams SgdParams::to_hyperparams() const {
  return {{"alpha", alpha},
          {"penalty", std::string(to_string(penalty))},
          {"l1_ratio", l1_ratio},
          {"fit_intercept", fit_intercept},
          {"shuffle", shuffle}};
}

double SgdParams::effective_l1_ratio() const noexcept {
  switch (penalty) {
    case Penalty::l2: return 0.0;
    case Penalty::l1: return 1.0;
    case Penalty::elasticnet: return l1_ratio;
  }
  return 0.0;
}

double sgd_t0(double alpha) noexcept {
  // Heuristic initial rate for the hinge loss: η0 = (1/√α)^½.
  const double typical_w = std::sqrt(1.0 / std::sqrt(alpha));
  return 1.0 / (typical_w * alpha);
}

namespace {

// Cumulative L1 penalty with clipping at zero.
void apply_l1(std::span<double> w, std::span<double> q, double u) {
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double z = w[j];
    if (w[j] > 0.0) {
      w[j] = std::max(0.0, w[j] - (u + q[j]));
    } else if (w[j] < 0.0) {
      w[j] = std::min(0.0, w[j] + (u - q[j]));
    }
    q[j] += w[j] - z;
  }
}

struct EpochStop {
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  bool done = false;

  void update(double loss, double tol, std::size_t n, std::size_t patience) {
    if (loss > best - tol * static_cast<double>(n)) {
      ++stale;
    } else {
      stale = 0;
    }
    best = std::min(best, loss);
    if (stale >= patience) done = true;
  }
};

}  // namespace

LinearModel fit_sgd(const Matrix& x, std::span<const Label> y, std::size_t n_classes, const SgdParams& params,
                    const TrainOptions& opts) {
  check_training_data(x, y, n_classes);
  opts.validate();
  if (!(params.alpha > 0.0)) throw FitError("SGD alpha must be positive");
  const std::size_t n = x.rows(), p = x.cols();
  const double l1_ratio = params.effective_l1_ratio();
  const double t0 = sgd_t0(params.alpha);
  const std::size_t max_epochs = opts.epochs_or(1000);

  std::vector<std::vector<double>> w(n_classes, std::vector<double>(p, 0.0));
  std::vector<std::vector<double>> q(n_classes, std::vector<double>(p, 0.0));
  std::vector<double> b(n_classes, 0.0), u(n_classes, 0.0), epoch_loss(n_classes);
  std::vector<EpochStop> stop(n_classes);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(opts.seed);
  Deadline deadline(opts.timeout);
  std::vector<double> curve;
  double t = 0.0;
  bool timed_out = false;
  std::size_t epoch = 0;

  for (; epoch < max_epochs; ++epoch) {
    if (deadline.expired()) {
      timed_out = true;
      break;
    }
    if (params.shuffle) rng.shuffle(order);
    std::fill(epoch_loss.begin(), epoch_loss.end(), 0.0);
    for (const std::size_t i : order) {
      const auto xi = x.row(i);
      const double eta = 1.0 / (params.alpha * (t0 + t));
      const double shrink = std::max(0.0, 1.0 - (1.0 - l1_ratio) * eta * params.alpha);
      for (std::size_t c = 0; c < n_classes; ++c) {
        if (stop[c].done) continue;
        const double yc = (y[i] == c) ? 1.0 : -1.0;
        const double margin = yc * (dot(w[c], xi) + b[c]);
        epoch_loss[c] += std::max(0.0, 1.0 - margin);
        if (shrink != 1.0)
          for (auto& v : w[c]) v *= shrink;
        if (margin < 1.0) {
          for (std::size_t j = 0; j < p; ++j) w[c][j] += eta * yc * xi[j];
          if (params.fit_intercept) b[c] += eta * yc;
        }
        if (l1_ratio > 0.0) {
          u[c] += l1_ratio * eta * params.alpha;
          apply_l1(w[c], q[c], u[c]);
        }
      }
      t += 1.0;
    }
    curve.push_back(std::accumulate(epoch_loss.begin(), epoch_loss.end(), 0.0) / static_cast<double>(n * n_classes));
    bool all_done = true;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (!stop[c].done) stop[c].update(epoch_loss[c], opts.tolerance, n, params.n_iter_no_change);
      all_done = all_done && stop[c].done;
    }
    if (all_done) {
      ++epoch;
      break;
    }
  }
  auto model = make_linear(Algorithm::SG, params.to_hyperparams(), w, std::move(b), p);
  model.set_training_trace(std::move(curve), epoch, timed_out);
  return model;
}

// ---------------------------------------------------------------------------
// Passive-aggressive

PassiveAggressiveParams PassiveAggressiveParams::from(const Hyperparams& hp) {
  hp_check_keys(hp, kPaKeys, "PA");
  PassiveAggressiveParams p;
  p.c = hp_real(hp, "C", p.c);
  p.fit_intercept = hp_bool(hp, "fit_intercept", p.fit_intercept);
  p.shuffle = hp_bool(hp, "shuffle", p.shuffle);
  return p;
}

Hyperparams PassiveAggressiveParams::to_hyperparams() const {
  return {{"C", c}, {"fit_intercept", fit_intercept}, {"shuffle", shuffle}};
}

double passive_aggressive_step(std::span<double> w, double& b, std::span<const double> x, double y, double c,
                               bool fit_intercept) {
  const double loss = std::max(0.0, 1.0 - y * (dot(w, x) + b));
  if (loss <= 0.0) return 0.0;
  const double sq = dot(x, x);
  if (sq == 0.0) return loss;
  const double tau = std::min(c, loss / sq);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] += tau * y * x[j];
  if (fit_intercept) b += tau * y;
  return loss;
}

LinearModel fit_passive_aggressive(const Matrix& x, std::span<const Label> y, std::size_t n_classes,
                                   const PassiveAggressiveParams& params, const TrainOptions& opts) {
  check_training_data(x, y, n_classes);
  opts.validate();
  if (!(params.c > 0.0)) throw FitError("passive-aggressive C must be positive");
  const std::size_t n = x.rows(), p = x.cols();
  const std::size_t max_epochs = opts.epochs_or(1000);

  std::vector<std::vector<double>> w(n_classes, std::vector<double>(p, 0.0));
  std::vector<double> b(n_classes, 0.0), epoch_loss(n_classes);
  std::vector<EpochStop> stop(n_classes);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(opts.seed);
  Deadline deadline(opts.timeout);
  std::vector<double> curve;
  bool timed_out = false;
  std::size_t epoch = 0;

  for (; epoch < max_epochs; ++epoch) {
    if (deadline.expired()) {
      timed_out = true;
      break;
    }
    if (params.shuffle) rng.shuffle(order);
    std::fill(epoch_loss.begin(), epoch_loss.end(), 0.0);
    for (const std::size_t i : order) {
      const auto xi = x.row(i);
      for (std::size_t c = 0; c < n_classes; ++c) {
        if (stop[c].done) continue;
        epoch_loss[c] += passive_aggressive_step(w[c], b[c], xi, y[i] == c ? 1.0 : -1.0, params.c, params.fit_intercept);
      }
    }
    curve.push_back(std::accumulate(epoch_loss.begin(), epoch_loss.end(), 0.0) / static_cast<double>(n * n_classes));
    bool all_done = true;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (!stop[c].done) stop[c].update(epoch_loss[c], opts.tolerance, n, params.n_iter_no_change);
      all_done = all_done && stop[c].done;
    }
    if (all_done) {
      ++epoch;
      break;
    }
  }
  auto model = make_linear(Algorithm::PA, params.to_hyperparams(), w, std::move(b), p);
  model.set_training_trace(std::move(curve), epoch, timed_out);
  return model;
}

// ---------------------------------------------------------------------------
// Logistic regression

LogisticParams LogisticParams::from(const Hyperparams& hp) {
  hp_check_keys(hp, kLogisticKeys, "LR");
  LogisticParams p;
  p.penalty = parse_penalty(hp_string(hp, "penalty", "l2"));
  if (p.penalty == Penalty::elasticnet) throw FitError("logistic regression supports l1 or l2 penalties");
  p.c = hp_real(hp, "C", p.c);
  p.fit_intercept = hp_bool(hp, "fit_intercept", p.fit_intercept);
  p.solver = hp_string(hp, "solver", p.solver);
  return p;
}

Hyperparams LogisticParams::to_hyperparams() const {
  return {{"penalty", std::string(to_string(penalty))}, {"C", c}, {"fit_intercept", fit_intercept}, {"solver", solver}};
}

double logistic_loss(const Matrix& x, std::span<const Label> y, const Matrix& w, std::span<const double> b,
                     double l2, Matrix* grad_w, std::vector<double>* grad_b) {
  const std::size_t n = x.rows(), k = w.cols();
  Matrix z = matmul(x, w);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = z.row(i);
    for (std::size_t c = 0; c < k; ++c) r[c] += b[c];
    const double m = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double v : r) s += std::exp(v - m);
    const double lse = m + std::log(s);
    loss += lse - r[y[i]];
    // Row becomes the residual softmax - onehot.
    for (std::size_t c = 0; c < k; ++c) r[c] = std::exp(r[c] - lse);
    r[y[i]] -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  double wsq = 0.0;
  for (double v : w.data()) wsq += v * v;
  loss += 0.5 * l2 * wsq;

  if (grad_w) {
    *grad_w = matmul_tn(x, z);
    auto g = grad_w->data();
    auto wd = w.data();
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = g[j] * inv_n + l2 * wd[j];
  }
  if (grad_b) {
    grad_b->assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto r = z.row(i);
      for (std::size_t c = 0; c < k; ++c) (*grad_b)[c] += r[c];
    }
    for (auto& v : *grad_b) v *= inv_n;
  }
  return loss;
}

namespace {

double l1_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += std::abs(v);
  return s;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

LinearModel fit_logistic(const Matrix& x, std::span<const Label> y, std::size_t n_classes,
                         const LogisticParams& params, const TrainOptions& opts) {
  check_training_data(x, y, n_classes);
  opts.validate();
  if (!(params.c > 0.0)) throw FitError("logistic regression C must be positive");
  const std::size_t n = x.rows(), p = x.cols();
  const double lambda = 1.0 / (params.c * static_cast<double>(n));
  const double l2 = params.penalty == Penalty::l2 ? lambda : 0.0;
  const double l1 = params.penalty == Penalty::l1 ? lambda : 0.0;
  const std::size_t max_iter = opts.epochs_or(100);

  Matrix w(p, n_classes), gw;
  std::vector<double> b(n_classes, 0.0), gb;
  double f = logistic_loss(x, y, w, b, l2, &gw, &gb);
  if (!params.fit_intercept) std::fill(gb.begin(), gb.end(), 0.0);
  std::vector<double> curve{f + l1 * l1_norm(w)};
  Deadline deadline(opts.timeout);
  double step = 1.0;
  bool timed_out = false;
  std::size_t it = 0;

  for (; it < max_iter; ++it) {
    if (l1 == 0.0 && std::max(max_abs(gw.data()), max_abs(gb)) < opts.tolerance) break;
    if (deadline.expired()) {
      timed_out = true;
      break;
    }
    Matrix w_new(p, n_classes), gw_new;
    std::vector<double> b_new(n_classes), gb_new;
    double f_new = 0.0, t = step, gd = 0.0, dd = 0.0, dmax = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries, t *= 0.5) {
      auto wn = w_new.data();
      auto wo = w.data();
      auto g = gw.data();
      for (std::size_t j = 0; j < wn.size(); ++j) {
        double v = wo[j] - t * g[j];
        if (l1 > 0.0) v = std::copysign(std::max(0.0, std::abs(v) - t * l1), v);
        wn[j] = v;
      }
      for (std::size_t c = 0; c < n_classes; ++c) b_new[c] = b[c] - t * gb[c];
      f_new = logistic_loss(x, y, w_new, b_new, l2, &gw_new, &gb_new);
      gd = 0.0;
      dd = 0.0;
      dmax = 0.0;
      for (std::size_t j = 0; j < wn.size(); ++j) {
        const double d = wn[j] - wo[j];
        gd += g[j] * d;
        dd += d * d;
        dmax = std::max(dmax, std::abs(d));
      }
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double d = b_new[c] - b[c];
        gd += gb[c] * d;
        dd += d * d;
        dmax = std::max(dmax, std::abs(d));
      }
      // Sufficient decrease for (proximal) gradient steps.
      if (f_new <= f + gd + dd / (2.0 * t)) {
        accepted = true;
        break;
      }
    }
    if (!accepted || dd == 0.0) break;
    if (!params.fit_intercept) std::fill(gb_new.begin(), gb_new.end(), 0.0);

    // Barzilai-Borwein trial step for the next iteration.
    double sy = 0.0;
    {
      auto g_old = gw.data();
      auto g_new = gw_new.data();
      auto wn = w_new.data();
      auto wo = w.data();
      for (std::size_t j = 0; j < wn.size(); ++j) sy += (wn[j] - wo[j]) * (g_new[j] - g_old[j]);
      for (std::size_t c = 0; c < n_classes; ++c) sy += (b_new[c] - b[c]) * (gb_new[c] - gb[c]);
    }
    step = sy > 0.0 ? std::clamp(dd / sy, 1e-8, 1e8) : std::min(2.0 * t, 1e8);

    const bool prox_converged = l1 > 0.0 && dmax / t < opts.tolerance;
    w = std::move(w_new);
    b = std::move(b_new);
    gw = std::move(gw_new);
    gb = std::move(gb_new);
    f = f_new;
    curve.push_back(f + l1 * l1_norm(w));
    if (prox_converged) {
      ++it;
      break;
    }
  }
  LinearModel model(Algorithm::LR, params.to_hyperparams(), std::move(w), std::move(b));
  model.set_training_trace(std::move(curve), it, timed_out);
  return model;
}

Matrix predict_proba(const LinearModel& model, const Matrix& features) {
  return softmax_rows(model.decision_function(features));
}

}  // namespace dgold
