#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "sparse_vector.hpp"

namespace nssi {

// Multinomial Naive Bayes over non-negative real weights. Arrays are indexed
// by label_index().
struct NBModel {
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_theta;
  double smoothing = 1.0;

  std::size_t dim() const noexcept { return log_theta[0].size(); }

  friend bool operator==(const NBModel&, const NBModel&) = default;
};

inline void require_training_set(std::span<const SparseVector> vectors, std::span<const Label> labels,
                                 const char* where) {
  if (vectors.size() != labels.size())
    throw DataError(std::string(where) + ": vectors and labels differ in length");
  if (vectors.empty()) throw DataError(std::string(where) + ": empty training set");
  bool seen[2] = {false, false};
  for (auto l : labels) seen[label_index(l)] = true;
  if (!seen[0] || !seen[1]) throw DataError(std::string(where) + ": training set has a single class");
  const auto dim = vectors.front().dim();
  for (const auto& v : vectors) require_dim(v, dim, where);
}

// log_theta[c][i] = ln((S_ci + a) / (S_c + a V)), S_ci the summed weight of
// feature i over class-c vectors; log_prior from class counts.
inline NBModel train_nb(std::span<const SparseVector> vectors, std::span<const Label> labels,
                        double smoothing = 1.0) {
  require_training_set(vectors, labels, "train_nb");
  if (!(smoothing > 0.0)) throw DataError("train_nb: smoothing must be positive");
  const std::size_t dim = vectors.front().dim();

  std::array<std::vector<double>, 2> mass{std::vector<double>(dim, 0.0),
                                          std::vector<double>(dim, 0.0)};
  std::array<double, 2> n_class{0.0, 0.0};
  for (std::size_t d = 0; d < vectors.size(); ++d) {
    const auto c = label_index(labels[d]);
    n_class[c] += 1.0;
    for (const auto& e : vectors[d]) {
      if (e.weight < 0.0) throw DataError("train_nb: negative feature weight");
      mass[c][e.index] += e.weight;
    }
  }

  NBModel m;
  m.smoothing = smoothing;
  const double n = n_class[0] + n_class[1];
  for (std::size_t c = 0; c < 2; ++c) {
    m.log_prior[c] = std::log(n_class[c] / n);
    double total = 0.0;
    for (auto x : mass[c]) total += x;
    const double denom = std::log(total + smoothing * static_cast<double>(dim));
    m.log_theta[c].resize(dim);
    for (std::size_t i = 0; i < dim; ++i) m.log_theta[c][i] = std::log(mass[c][i] + smoothing) - denom;
  }
  return m;
}

// score(c) = log_prior[c] + sum_i w_i log_theta[c][i]
inline std::array<double, 2> nb_log_scores(const NBModel& m, const SparseVector& v) {
  require_dim(v, m.dim(), "nb_log_scores");
  std::array<double, 2> s = m.log_prior;
  for (std::size_t c = 0; c < 2; ++c)
    for (const auto& e : v) s[c] += e.weight * m.log_theta[c][e.index];
  return s;
}

// Ties go to the positive class.
inline Label predict(const NBModel& m, const SparseVector& v) {
  const auto s = nb_log_scores(m, v);
  return s[label_index(Label::positive)] >= s[label_index(Label::negative)] ? Label::positive
                                                                              : Label::negative;
}

inline double nb_score_margin(const NBModel& m, const SparseVector& v) {
  const auto s = nb_log_scores(m, v);
  return s[label_index(Label::positive)] - s[label_index(Label::negative)];
}

inline nlohmann::ordered_json to_json(const NBModel& m) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["kind"] = "nb";
  j["smoothing"] = m.smoothing;
  j["log_prior"] = {{"positive", m.log_prior[label_index(Label::positive)]},
                    {"negative", m.log_prior[label_index(Label::negative)]}};
  j["log_theta"] = {{"positive", m.log_theta[label_index(Label::positive)]},
                    {"negative", m.log_theta[label_index(Label::negative)]}};
  return j;
}

inline NBModel nb_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1 || j.at("kind").get<std::string>() != "nb")
      throw DataError("nb model: expected version 1, kind \"nb\"");
    NBModel m;
    m.smoothing = j.at("smoothing").get<double>();
    for (const auto l : {Label::positive, Label::negative}) {
      const std::string key(to_string(l));
      m.log_prior[label_index(l)] = j.at("log_prior").at(key).get<double>();
      m.log_theta[label_index(l)] = j.at("log_theta").at(key).get<std::vector<double>>();
    }
    if (m.log_theta[0].size() != m.log_theta[1].size())
      throw DataError("nb model: class rows differ in length");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("nb model: ") + e.what());
  }
}

}  // namespace nssi
