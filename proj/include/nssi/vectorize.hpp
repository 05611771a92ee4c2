#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "corpus.hpp"
#include "sparse_vector.hpp"
#include "vocabulary.hpp"

namespace nssi {

// Simple-Count representation: weight i is the number of occurrences of term i
// in the profile's interest multiset. Out-of-vocabulary interests are ignored.
inline SparseVector count_vector(const UserProfile& profile, const Vocabulary& vocab) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto& t : profile.interests)
    if (auto i = vocab.find(t)) ++counts[*i];
  SparseVector v(vocab.size());
  for (const auto& [i, c] : counts) v.push_back(i, static_cast<double>(c));
  return v;
}

inline std::vector<SparseVector> count_vectors(std::span<const UserProfile> profiles,
                                               const Vocabulary& vocab) {
  std::vector<SparseVector> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back(count_vector(p, vocab));
  return out;
}

// Extensions to raw tf * ln(N/df); both off by default.
struct TfidfOptions {
  // idf = ln((1 + N) / (1 + df)) + 1
  bool smooth_idf = false;
  // scale each vector to unit Euclidean norm
  bool l2_normalize = false;
};

// idf[i] = ln(n_docs / df[i]). A term with df 0 (possible only for statistics
// recounted over a subset) gets idf 0 so it never carries weight.
inline std::vector<double> idf(const TermStats& stats, const TfidfOptions& opts = {}) {
  if (stats.n_docs == 0) throw DataError("idf: statistics cover no documents");
  std::vector<double> out(stats.df_total.size(), 0.0);
  const double n = static_cast<double>(stats.n_docs);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double df = static_cast<double>(stats.df_total[i]);
    if (opts.smooth_idf)
      out[i] = std::log((1.0 + n) / (1.0 + df)) + 1.0;
    else if (stats.df_total[i] > 0)
      out[i] = std::log(n / df);
  }
  return out;
}

inline std::vector<double> idf(const Vocabulary& vocab, const TfidfOptions& opts = {}) {
  return idf(vocab.stats(), opts);
}

// Element-wise product of a count vector with precomputed idf weights; entries
// whose idf is exactly zero are dropped.
inline SparseVector tfidf_from_counts(const SparseVector& counts, std::span<const double> idf_weights,
                                      const TfidfOptions& opts = {}) {
  require_dim(counts, idf_weights.size(), "tfidf");
  SparseVector v(counts.dim());
  double norm2 = 0.0;
  for (const auto& e : counts) {
    const double w = e.weight * idf_weights[e.index];
    norm2 += w * w;
  }
  const double scale = (opts.l2_normalize && norm2 > 0.0) ? 1.0 / std::sqrt(norm2) : 1.0;
  for (const auto& e : counts) v.push_back(e.index, e.weight * idf_weights[e.index] * scale);
  return v;
}

inline SparseVector tfidf_vector(const UserProfile& profile, const Vocabulary& vocab,
                                 std::span<const double> idf_weights,
                                 const TfidfOptions& opts = {}) {
  return tfidf_from_counts(count_vector(profile, vocab), idf_weights, opts);
}

inline SparseVector tfidf_vector(const UserProfile& profile, const Vocabulary& vocab,
                                 const TfidfOptions& opts = {}) {
  const auto w = idf(vocab, opts);
  return tfidf_vector(profile, vocab, w, opts);
}

}  // namespace nssi
