#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "naive_bayes.hpp"
#include "sparse_vector.hpp"

namespace nssi {

struct LRModel {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 1.0;
  bool converged = false;
  std::size_t iterations_used = 0;

  std::size_t dim() const noexcept { return weights.size(); }

  friend bool operator==(const LRModel&, const LRModel&) = default;
};

struct LrOptions {
  double lambda = 1.0;
  double tol = 1e-6;
  std::size_t max_iter = 1000;
};

// Overflow-free logistic function.
inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) noexcept {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;
  double grad_bias = 0.0;
};

// Objective: mean negative log-likelihood + (lambda / 2n) ||w||^2, bias
// unregularized.
inline double lr_loss(std::span<const SparseVector> x, std::span<const Label> y,
                      std::span<const double> w, double b, double lambda) {
  const double n = static_cast<double>(x.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = x[i].dot(w) + b;
    loss += softplus(z) - (y[i] == Label::positive ? z : 0.0);
  }
  double reg = 0.0;
  for (auto wi : w) reg += wi * wi;
  return loss / n + 0.5 * lambda / n * reg;
}

inline LossGradient lr_loss_gradient(std::span<const SparseVector> x, std::span<const Label> y,
                                     std::span<const double> w, double b, double lambda) {
  const double n = static_cast<double>(x.size());
  LossGradient g;
  g.grad_weights.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = x[i].dot(w) + b;
    const double target = y[i] == Label::positive ? 1.0 : 0.0;
    g.loss += softplus(z) - target * z;
    const double r = sigmoid(z) - target;
    for (const auto& e : x[i]) g.grad_weights[e.index] += r * e.weight;
    g.grad_bias += r;
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    reg += w[j] * w[j];
    g.grad_weights[j] = g.grad_weights[j] / n + lambda / n * w[j];
  }
  g.grad_bias /= n;
  g.loss = g.loss / n + 0.5 * lambda / n * reg;
  return g;
}

// Full-batch gradient descent with Armijo backtracking. Stops when the
// gradient's infinity norm drops below tol, after max_iter steps, or when no
// step along the negative gradient decreases the loss. If `loss_trace` is
// given it receives the loss at the start and after each accepted step.
inline LRModel train_lr(std::span<const SparseVector> x, std::span<const Label> y,
                        const LrOptions& opts = {}, std::vector<double>* loss_trace = nullptr) {
  require_training_set(x, y, "train_lr");
  if (!(opts.lambda >= 0.0)) throw DataError("train_lr: lambda must be non-negative");
  const std::size_t dim = x.front().dim();

  LRModel m;
  m.lambda = opts.lambda;
  m.weights.assign(dim, 0.0);

  auto g = lr_loss_gradient(x, y, m.weights, m.bias, opts.lambda);
  if (loss_trace) loss_trace->push_back(g.loss);
  double step = 1.0;
  std::vector<double> trial(dim);

  auto grad_inf = [](const LossGradient& lg) {
    double v = std::abs(lg.grad_bias);
    for (auto gi : lg.grad_weights) v = std::max(v, std::abs(gi));
    return v;
  };

  for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
    if (!std::isfinite(g.loss)) throw NumericError("train_lr: non-finite loss");
    if (grad_inf(g) < opts.tol) {
      m.converged = true;
      break;
    }
    double gnorm2 = g.grad_bias * g.grad_bias;
    for (auto gi : g.grad_weights) gnorm2 += gi * gi;

    bool accepted = false;
    double trial_bias = 0.0;
    double trial_loss = 0.0;
    for (int shrink = 0; shrink < 60; ++shrink) {
      for (std::size_t j = 0; j < dim; ++j) trial[j] = m.weights[j] - step * g.grad_weights[j];
      trial_bias = m.bias - step * g.grad_bias;
      trial_loss = lr_loss(x, y, trial, trial_bias, opts.lambda);
      if (std::isfinite(trial_loss) && trial_loss <= g.loss - 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    m.weights.swap(trial);
    trial.resize(dim);
    m.bias = trial_bias;
    m.iterations_used = iter + 1;
    g = lr_loss_gradient(x, y, m.weights, m.bias, opts.lambda);
    if (loss_trace) loss_trace->push_back(g.loss);
    step = std::min(step * 2.0, 1e6);
  }
  if (!m.converged && grad_inf(g) < opts.tol) m.converged = true;
  for (auto wi : m.weights)
    if (!std::isfinite(wi)) throw NumericError("train_lr: non-finite weight");
  return m;
}

inline double lr_probability(const LRModel& m, const SparseVector& v) {
  require_dim(v, m.dim(), "lr_probability");
  return sigmoid(v.dot(m.weights) + m.bias);
}

// Positive iff the probability is at least 0.5.
inline Label predict(const LRModel& m, const SparseVector& v) {
  return lr_probability(m, v) >= 0.5 ? Label::positive : Label::negative;
}

inline nlohmann::ordered_json to_json(const LRModel& m) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["kind"] = "lr";
  j["weights"] = m.weights;
  j["bias"] = m.bias;
  j["lambda"] = m.lambda;
  j["converged"] = m.converged;
  j["iterations_used"] = m.iterations_used;
  return j;
}

inline LRModel lr_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1 || j.at("kind").get<std::string>() != "lr")
      throw DataError("lr model: expected version 1, kind \"lr\"");
    LRModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.iterations_used = j.at("iterations_used").get<std::size_t>();
    for (auto w : m.weights)
      if (!std::isfinite(w)) throw DataError("lr model: non-finite weight");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("lr model: ") + e.what());
  }
}

}  // namespace nssi
