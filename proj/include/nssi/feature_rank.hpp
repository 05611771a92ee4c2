#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "naive_bayes.hpp"
#include "vocabulary.hpp"

namespace nssi {

struct RankedFeature {
  std::string term;
  double odds_ratio = 1.0;
  std::size_t df_pos = 0;
  std::size_t df_neg = 0;
};

struct OddsRatioOptions {
  // Added to each cell; p = (df + c) / (n + 2c). 0.5 is the Haldane-Anscombe
  // correction.
  double correction = 0.5;
};

// Descending odds ratio, ties by term ascending.
inline void sort_ranking(std::vector<RankedFeature>& ranked) {
  std::sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
    if (a.odds_ratio != b.odds_ratio) return a.odds_ratio > b.odds_ratio;
    return a.term < b.term;
  });
}

// Presence/absence odds ratio [p_pos / (1 - p_pos)] / [p_neg / (1 - p_neg)] from
// per-class document frequencies. With p = (df + c) / (n + 2c) the odds reduce
// to (df + c) / (n - df + c).
inline std::vector<RankedFeature> odds_ratios(const Vocabulary& vocab,
                                              const OddsRatioOptions& opts = {}) {
  const auto& s = vocab.stats();
  if (s.n_pos == 0 || s.n_neg == 0)
    throw DataError("odds_ratios: vocabulary was built over a single-class corpus");
  if (!(opts.correction >= 0.0)) throw DataError("odds_ratios: correction must be non-negative");
  const double c = opts.correction;
  const double n_pos = static_cast<double>(s.n_pos);
  const double n_neg = static_cast<double>(s.n_neg);

  std::vector<RankedFeature> out;
  out.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double dp = static_cast<double>(s.df_pos[i]);
    const double dn = static_cast<double>(s.df_neg[i]);
    const double odds_ratio = ((dp + c) * (n_neg - dn + c)) / ((n_pos - dp + c) * (dn + c));
    if (!std::isfinite(odds_ratio) || !(odds_ratio > 0.0))
      throw DataError("odds_ratios: degenerate cell for term '" + vocab.term(i) +
                      "' (enable the correction)");
    out.push_back({vocab.term(i), odds_ratio, s.df_pos[i], s.df_neg[i]});
  }
  sort_ranking(out);
  return out;
}

// Multinomial alternative: theta_pos[i] / theta_neg[i] from a trained NB model.
inline std::vector<RankedFeature> likelihood_ratios(const Vocabulary& vocab, const NBModel& nb) {
  if (nb.dim() != vocab.size()) throw DataError("likelihood_ratios: model/vocabulary mismatch");
  std::vector<RankedFeature> out;
  out.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double r = std::exp(nb.log_theta[label_index(Label::positive)][i] -
                              nb.log_theta[label_index(Label::negative)][i]);
    out.push_back({vocab.term(i), r, vocab.stats().df_pos[i], vocab.stats().df_neg[i]});
  }
  sort_ranking(out);
  return out;
}

struct TopBottom {
  std::vector<RankedFeature> top;
  std::vector<RankedFeature> bottom;
};

// First n entries, and last n entries (most negative first).
inline TopBottom top_features(const std::vector<RankedFeature>& ranked, std::size_t n = 20) {
  if (n > ranked.size())
    throw DataError("top_features: n=" + std::to_string(n) + " exceeds vocabulary size " +
                    std::to_string(ranked.size()));
  TopBottom tb;
  tb.top.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n));
  tb.bottom.assign(ranked.rbegin(), ranked.rbegin() + static_cast<std::ptrdiff_t>(n));
  return tb;
}

inline nlohmann::ordered_json to_json(const std::vector<RankedFeature>& features) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& f : features) {
    nlohmann::ordered_json o;
    o["term"] = f.term;
    o["odds_ratio"] = f.odds_ratio;
    o["df_pos"] = f.df_pos;
    o["df_neg"] = f.df_neg;
    j.push_back(std::move(o));
  }
  return j;
}

inline std::string render_top_bottom(const TopBottom& tb) {
  std::size_t width = std::string("Top positive").size();
  for (const auto& f : tb.top) width = std::max(width, f.term.size() + 12);
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width) + 2) << "Top positive"
     << "Top negative\n";
  for (std::size_t i = 0; i < tb.top.size(); ++i) {
    std::ostringstream a, b;
    a << tb.top[i].term << " (" << std::setprecision(4) << tb.top[i].odds_ratio << ")";
    b << tb.bottom[i].term << " (" << std::setprecision(4) << tb.bottom[i].odds_ratio << ")";
    os << std::left << std::setw(static_cast<int>(width) + 2) << a.str() << b.str() << '\n';
  }
  return os.str();
}

}  // namespace nssi
