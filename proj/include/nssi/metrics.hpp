#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"

namespace nssi {

// Positive is the harmer class.
struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) throw DataError("confusion: length mismatch");
  if (truth.empty()) throw DataError("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == Label::positive;
    const bool p = predicted[i] == Label::positive;
    if (t && p)
      ++cm.tp;
    else if (!t && p)
      ++cm.fp;
    else if (!t && !p)
      ++cm.tn;
    else
      ++cm.fn;
  }
  return cm;
}

inline double f1_score(double precision, double recall) noexcept {
  const double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

// Degenerate denominators give 0.0 and set the matching flag.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;

  bool degenerate() const noexcept { return precision_undefined || recall_undefined || f1_undefined; }
};

inline Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("metrics: empty confusion matrix");
  Metrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  if (cm.tp + cm.fp == 0)
    m.precision_undefined = true;
  else
    m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  if (cm.tp + cm.fn == 0)
    m.recall_undefined = true;
  else
    m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  if (m.precision + m.recall == 0.0)
    m.f1_undefined = true;
  else
    m.f1 = f1_score(m.precision, m.recall);
  return m;
}

}  // namespace nssi
