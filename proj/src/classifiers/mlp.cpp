#include "dgold/classifiers/mlp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "dgold/error.hpp"

namespace dgold {

namespace {
constexpr std::string_view kMlpKeys[] = {"hidden_layer_sizes", "activation", "solver", "alpha",
                                         "learning_rate_init", "batch_size"};
}

Activation parse_activation(std::string_view s) {
  if (s == "identity") return Activation::identity;
  if (s == "logistic") return Activation::logistic;
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw FitError("unknown activation '" + std::string(s) + "'");
}

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::logistic: return "logistic";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
  }
  return "relu";
}

std::vector<std::size_t> parse_layer_sizes(std::string_view s) {
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    const auto tok = s.substr(start, comma - start);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || v == 0) {
      throw FitError("bad hidden_layer_sizes '" + std::string(s) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_layer_sizes(std::span<const std::size_t> sizes) {
  std::string s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(sizes[i]);
  }
  return s;
}

MlpParams MlpParams::from(const Hyperparams& hp) {
  hp_check_keys(hp, kMlpKeys, "MP");
  MlpParams p;
  if (hp.contains("hidden_layer_sizes")) p.hidden_layers = parse_layer_sizes(hp_string(hp, "hidden_layer_sizes", ""));
  p.activation = parse_activation(hp_string(hp, "activation", "relu"));
  p.solver = hp_string(hp, "solver", p.solver);
  p.alpha = hp_real(hp, "alpha", p.alpha);
  p.learning_rate = hp_real(hp, "learning_rate_init", p.learning_rate);
  const auto bs = hp_int(hp, "batch_size", static_cast<std::int64_t>(p.batch_size));
  if (bs < 1) throw FitError("batch_size must be at least 1");
  p.batch_size = static_cast<std::size_t>(bs);
  return p;
}

Hyperparams MlpParams::to_hyperparams() const {
  return {{"hidden_layer_sizes", format_layer_sizes(hidden_layers)},
          {"activation", std::string(to_string(activation))},
          {"solver", solver},
          {"alpha", alpha},
          {"learning_rate_init", learning_rate},
          {"batch_size", static_cast<std::int64_t>(batch_size)}};
}

// ---------------------------------------------------------------------------

namespace {

void activate(Matrix& z, Activation a) {
  for (auto& v : z.data()) {
    switch (a) {
      case Activation::identity: break;
      case Activation::logistic: v = 1.0 / (1.0 + std::exp(-v)); break;
      case Activation::tanh: v = std::tanh(v); break;
      case Activation::relu: v = v > 0.0 ? v : 0.0; break;
    }
  }
}

// Multiplies delta in place by the activation derivative, expressed through
// the activation output.
void scale_by_derivative(Matrix& delta, const Matrix& activated, Activation a) {
  auto d = delta.data();
  auto h = activated.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    switch (a) {
      case Activation::identity: break;
      case Activation::logistic: d[i] *= h[i] * (1.0 - h[i]); break;
      case Activation::tanh: d[i] *= 1.0 - h[i] * h[i]; break;
      case Activation::relu: d[i] = h[i] > 0.0 ? d[i] : 0.0; break;
    }
  }
}

void add_bias(Matrix& z, std::span<const double> b) {
  for (std::size_t i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
}

}  // namespace

MlpNetwork MlpNetwork::initialize(std::size_t n_features, std::span<const std::size_t> hidden, std::size_t n_classes,
                                  Activation activation, Rng& rng, bool zero_init) {
  MlpNetwork net;
  net.activation_ = activation;
  std::vector<std::size_t> sizes{n_features};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(n_classes);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
    Matrix w(fan_in, fan_out);
    std::vector<double> b(fan_out, 0.0);
    if (!zero_init) {
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (auto& v : w.data()) v = rng.uniform(-bound, bound);
      for (auto& v : b) v = rng.uniform(-bound, bound);
    }
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(std::move(b));
  }
  return net;
}

Matrix MlpNetwork::predict_proba(const Matrix& x) const {
  Matrix a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix z = matmul(a, weights_[l]);
    add_bias(z, biases_[l]);
    if (l + 1 < weights_.size()) activate(z, activation_);
    a = std::move(z);
  }
  return softmax_rows(a);
}

double MlpNetwork::loss(const Matrix& x, std::span<const Label> y, double alpha, std::vector<double>* grad) const {
  const std::size_t m = x.rows();
  const std::size_t layers = weights_.size();
  std::vector<Matrix> acts;  // acts[l] is the input of layer l
  acts.reserve(layers + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = matmul(acts.back(), weights_[l]);
    add_bias(z, biases_[l]);
    if (l + 1 < layers) activate(z, activation_);
    acts.push_back(std::move(z));
  }
  // Softmax cross-entropy on the output logits; turn them into the residual.
  Matrix& out = acts.back();
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    auto r = out.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double v : r) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    loss += lse - r[y[i]];
    for (auto& v : r) v = std::exp(v - lse);
    r[y[i]] -= 1.0;
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  loss *= inv_m;
  double wsq = 0.0;
  for (const auto& w : weights_)
    for (double v : w.data()) wsq += v * v;
  loss += 0.5 * alpha * wsq * inv_m;
  if (!grad) return loss;

  std::vector<Matrix> gw(layers);
  std::vector<std::vector<double>> gb(layers);
  Matrix delta = std::move(out);
  for (auto& v : delta.data()) v *= inv_m;
  for (std::size_t l = layers; l-- > 0;) {
    gw[l] = matmul_tn(acts[l], delta);
    auto g = gw[l].data();
    auto w = weights_[l].data();
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += alpha * inv_m * w[j];
    gb[l].assign(delta.cols(), 0.0);
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      auto r = delta.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) gb[l][j] += r[j];
    }
    if (l > 0) {
      Matrix prev = matmul(delta, transpose(weights_[l]));
      scale_by_derivative(prev, acts[l], activation_);
      delta = std::move(prev);
    }
  }
  grad->clear();
  grad->reserve(parameter_count());
  for (std::size_t l = 0; l < layers; ++l) {
    grad->insert(grad->end(), gw[l].data().begin(), gw[l].data().end());
    grad->insert(grad->end(), gb[l].begin(), gb[l].end());
  }
  return loss;
}

std::size_t MlpNetwork::parameter_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].data().size() + biases_[l].size();
  return n;
}

std::vector<double> MlpNetwork::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.insert(out.end(), weights_[l].data().begin(), weights_[l].data().end());
    out.insert(out.end(), biases_[l].begin(), biases_[l].end());
  }
  return out;
}

void MlpNetwork::set_flat_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw ShapeError("parameter vector has the wrong length");
  std::size_t at = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto w = weights_[l].data();
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(at), w.size(), w.begin());
    at += w.size();
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(at), biases_[l].size(), biases_[l].begin());
    at += biases_[l].size();
  }
}

// ---------------------------------------------------------------------------

MlpModel::MlpModel(MlpParams params, MlpNetwork net, std::size_t n_classes, std::size_t n_features)
    : FittedModel(params.to_hyperparams(), n_classes, n_features), params_(std::move(params)), net_(std::move(net)) {}

void MlpModel::set_training_trace(std::vector<double> curve, bool timed_out) {
  loss_curve_ = std::move(curve);
  if (timed_out) mark_timed_out();
}

Labels MlpModel::predict_rows(const Matrix& features) const { return argmax_rows(net_.predict_proba(features)); }

MlpModel fit_mlp(const Matrix& x, std::span<const Label> y, std::size_t n_classes, const MlpParams& params,
                 const TrainOptions& opts) {
  check_training_data(x, y, n_classes);
  opts.validate();
  if (!(params.learning_rate > 0.0)) throw FitError("learning_rate_init must be positive");
  if (params.alpha < 0.0) throw FitError("alpha must be non-negative");
  const std::size_t n = x.rows();
  const std::size_t batch = std::min(params.batch_size, n);
  const std::size_t max_epochs = opts.epochs_or(200);

  Rng rng(opts.seed);
  MlpNetwork net = MlpNetwork::initialize(x.cols(), params.hidden_layers, n_classes, params.activation, rng,
                                          params.zero_init);
  std::vector<double> theta = net.flat_parameters();
  std::vector<double> m1(theta.size(), 0.0), m2(theta.size(), 0.0), grad;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Deadline deadline(opts.timeout);
  std::vector<double> curve;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0, step = 0;
  bool timed_out = false;

  for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
    if (deadline.expired()) {
      timed_out = true;
      break;
    }
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      const auto idx = std::span(order).subspan(start, end - start);
      const Matrix xb = take_rows(x, idx);
      Labels yb(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = y[idx[i]];
      epoch_loss += net.loss(xb, yb, params.alpha, &grad) * static_cast<double>(idx.size());

      ++step;
      const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(step));
      const double lr = params.learning_rate * std::sqrt(c2) / c1;
      for (std::size_t j = 0; j < theta.size(); ++j) {
        m1[j] = params.beta1 * m1[j] + (1.0 - params.beta1) * grad[j];
        m2[j] = params.beta2 * m2[j] + (1.0 - params.beta2) * grad[j] * grad[j];
        theta[j] -= lr * m1[j] / (std::sqrt(m2[j]) + params.epsilon);
      }
      net.set_flat_parameters(theta);
    }
    epoch_loss /= static_cast<double>(n);
    curve.push_back(epoch_loss);
    if (epoch_loss > best - opts.tolerance) {
      ++stale;
    } else {
      stale = 0;
    }
    best = std::min(best, epoch_loss);
    if (stale > params.n_iter_no_change) break;
  }
  MlpModel model(params, std::move(net), n_classes, x.cols());
  model.set_training_trace(std::move(curve), timed_out);
  return model;
}

}  // namespace dgold
