#pragma once

// Linear level-2 learners. All four produce a decision function X·W + b
// (W is n_features x n_classes) and predict its row-wise argmax.

#include <span>
#include <string>
#include <vector>

#include "dgold/classifiers/common.hpp"

namespace dgold {

class LinearModel final : public FittedModel {
 public:
  LinearModel(Algorithm algorithm, Hyperparams hp, Matrix weights, std::vector<double> intercept);

  Algorithm algorithm() const noexcept override { return algorithm_; }
  const Matrix& weights() const noexcept { return weights_; }
  const std::vector<double>& intercept() const noexcept { return intercept_; }

  Matrix decision_function(const Matrix& features) const;

  /// Objective after each accepted optimizer step (empty for closed-form fits).
  const std::vector<double>& loss_curve() const noexcept { return loss_curve_; }
  std::size_t iterations() const noexcept { return iterations_; }

  void set_training_trace(std::vector<double> curve, std::size_t iterations, bool timed_out);

 private:
  Labels predict_rows(const Matrix& features) const override;

  Algorithm algorithm_;
  Matrix weights_;
  std::vector<double> intercept_;
  std::vector<double> loss_curve_;
  std::size_t iterations_ = 0;
};

// --- Ridge ------------------------------------------------------------------

struct RidgeParams {
  double alpha = 1.0;
  std::string solver = "auto";  // accepted for compatibility; there is one solver

  static RidgeParams from(const Hyperparams& hp);
  Hyperparams to_hyperparams() const;
};

/// One-vs-rest ridge regression on ±1 targets. Solves
/// (XcᵀXc + αI)·W = XcᵀY with column-centred Xc; the unpenalized intercept
/// is recovered from the column means.
LinearModel fit_ridge(const Matrix& x, std::span<const Label> y, std::size_t n_classes, const RidgeParams& params);

// --- SGD (hinge loss) -------------------------------------------------------

enum class Penalty { l2, l1, elasticnet };
Penalty parse_penalty(std::string_view s);
std::string_view to_string(Penalty p) noexcept;

struct SgdParams {
  double alpha = 1e-4;
  Penalty penalty = Penalty::l2;
  double l1_ratio = 0.15;  // elasticnet mix; l1 uses 1, l2 uses 0
  bool fit_intercept = true;
  bool shuffle = true;
  std::size_t n_iter_no_change = 5;

  static SgdParams from(const Hyperparams& hp);
  Hyperparams to_hyperparams() const;
  double effective_l1_ratio() const noexcept;
};

/// Learning-rate offset t0 of the schedule η_t = 1 / (α·(t0 + t)).
double sgd_t0(double alpha) noexcept;

/// One-vs-rest hinge-loss linear model trained by per-sample SGD. L1 and
/// elastic-net penalties use cumulative clipped (truncated) updates.
LinearModel fit_sgd(const Matrix& x, std::span<const Label> y, std::size_t n_classes, const SgdParams& params,
                    const TrainOptions& opts);

// --- Passive-aggressive (PA-I) ---------------------------------------------

struct PassiveAggressiveParams {
  double c = 1.0;
  bool fit_intercept = true;
  bool shuffle = true;
  std::size_t n_iter_no_change = 5;

  static PassiveAggressiveParams from(const Hyperparams& hp);
  Hyperparams to_hyperparams() const;
};

/// Single PA-I step on one binary scorer: with hinge loss ℓ > 0,
/// τ = min(C, ℓ/‖x‖²) and w += τ·y·x (b += τ·y when fitting an intercept).
/// Returns the loss before the step.
double passive_aggressive_step(std::span<double> w, double& b, std::span<const double> x, double y, double c,
                               bool fit_intercept);

LinearModel fit_passive_aggressive(const Matrix& x, std::span<const Label> y, std::size_t n_classes,
                                   const PassiveAggressiveParams& params, const TrainOptions& opts);

// --- Multinomial logistic regression ---------------------------------------

struct LogisticParams {
  Penalty penalty = Penalty::l2;  // l1 or l2
  double c = 1.0;                 // inverse regularization strength
  bool fit_intercept = true;
  std::string solver = "lbfgs";   // accepted for compatibility

  static LogisticParams from(const Hyperparams& hp);
  Hyperparams to_hyperparams() const;
};

/// Mean softmax cross-entropy of X·W + b plus (l2/2)·‖W‖². Fills the
/// gradients when the pointers are non-null (grad_w is resized).
double logistic_loss(const Matrix& x, std::span<const Label> y, const Matrix& w, std::span<const double> b,
                     double l2, Matrix* grad_w, std::vector<double>* grad_b);

/// Full-batch gradient descent with Armijo backtracking (Barzilai-Borwein
/// trial steps); L1 via a proximal soft-threshold step. Stops when the
/// (proximal) gradient ∞-norm falls below opts.tolerance.
LinearModel fit_logistic(const Matrix& x, std::span<const Label> y, std::size_t n_classes,
                         const LogisticParams& params, const TrainOptions& opts);

/// Class probabilities of a fitted logistic model.
Matrix predict_proba(const LinearModel& model, const Matrix& features);

}  // namespace dgold
