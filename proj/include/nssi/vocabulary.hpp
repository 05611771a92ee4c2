#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "random.hpp"

namespace nssi {

// Document-frequency pruning bounds. A term is kept iff
// min_df < df < max_df_ratio * n_docs (both strict).
struct VocabularyBounds {
  std::size_t min_df = 100;
  double max_df_ratio = 0.70;
};

// Per-term document frequencies (profiles containing the term at least once)
// over some set of profiles, split by class.
struct TermStats {
  std::size_t n_docs = 0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::vector<std::size_t> df_total;
  std::vector<std::size_t> df_pos;
  std::vector<std::size_t> df_neg;

  friend bool operator==(const TermStats&, const TermStats&) = default;
};

// Pruned interest-to-feature mapping. Terms are lexicographically ordered and
// feature i is terms()[i].
class Vocabulary {
 public:
  Vocabulary() = default;

  Vocabulary(std::vector<std::string> terms, TermStats stats, VocabularyBounds bounds)
      : terms_(std::move(terms)), stats_(std::move(stats)), bounds_(bounds) {
    const auto n = terms_.size();
    if (stats_.df_total.size() != n || stats_.df_pos.size() != n || stats_.df_neg.size() != n)
      throw DataError("vocabulary: statistics do not match term count");
    if (stats_.n_pos + stats_.n_neg != stats_.n_docs)
      throw DataError("vocabulary: n_pos + n_neg != n_docs");
    index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!index_.emplace(terms_[i], i).second)
        throw DataError("vocabulary: duplicate term '" + terms_[i] + "'");
      if (stats_.df_pos[i] + stats_.df_neg[i] != stats_.df_total[i])
        throw DataError("vocabulary: df_pos + df_neg != df for '" + terms_[i] + "'");
      if (stats_.df_pos[i] > stats_.n_pos || stats_.df_neg[i] > stats_.n_neg)
        throw DataError("vocabulary: document frequency exceeds class size for '" + terms_[i] +
                        "'");
    }
  }

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::string& term(std::size_t i) const { return terms_.at(i); }
  const TermStats& stats() const noexcept { return stats_; }
  const VocabularyBounds& bounds() const noexcept { return bounds_; }

  std::optional<std::size_t> find(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Hex FNV-1a over the ordered term list; identifies the feature space.
  std::string fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : terms_) {
      h = fnv1a64(t, h);
      h = fnv1a64(std::string_view("\0", 1), h);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  // Same terms, with document frequencies recomputed over `profiles`. Used to
  // derive fold-local statistics; recounted terms may fall outside the bounds.
  Vocabulary recount(std::span<const UserProfile> profiles) const {
    TermStats s;
    s.df_total.assign(size(), 0);
    s.df_pos.assign(size(), 0);
    s.df_neg.assign(size(), 0);
    std::vector<std::size_t> last_seen(size(), SIZE_MAX);
    for (std::size_t d = 0; d < profiles.size(); ++d) {
      const auto& p = profiles[d];
      ++s.n_docs;
      (p.label == Label::positive ? s.n_pos : s.n_neg)++;
      for (const auto& t : p.interests) {
        auto i = find(t);
        if (!i || last_seen[*i] == d) continue;
        last_seen[*i] = d;
        ++s.df_total[*i];
        (p.label == Label::positive ? s.df_pos : s.df_neg)[*i]++;
      }
    }
    return Vocabulary(terms_, std::move(s), bounds_);
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.stats_ == b.stats_ && a.bounds_.min_df == b.bounds_.min_df &&
           a.bounds_.max_df_ratio == b.bounds_.max_df_ratio;
  }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
  TermStats stats_;
  VocabularyBounds bounds_;
};

inline bool within_bounds(std::size_t df, std::size_t n_docs, const VocabularyBounds& b) {
  return df > b.min_df && static_cast<double>(df) < b.max_df_ratio * static_cast<double>(n_docs);
}

inline Vocabulary build_vocabulary(std::span<const UserProfile> profiles,
                                   const VocabularyBounds& bounds = {}) {
  if (profiles.empty()) throw DataError("build_vocabulary: empty corpus");
  if (!(bounds.max_df_ratio > 0.0 && bounds.max_df_ratio <= 1.0))
    throw DataError("build_vocabulary: max_df_ratio must be in (0, 1]");

  struct Counts {
    std::size_t pos = 0, neg = 0;
    std::size_t last_doc = SIZE_MAX;
  };
  std::map<std::string, Counts, std::less<>> df;
  std::size_t n_pos = 0;
  for (std::size_t d = 0; d < profiles.size(); ++d) {
    const auto& p = profiles[d];
    if (p.label == Label::positive) ++n_pos;
    for (const auto& t : p.interests) {
      auto& c = df[t];
      if (c.last_doc == d) continue;
      c.last_doc = d;
      (p.label == Label::positive ? c.pos : c.neg)++;
    }
  }

  std::vector<std::string> terms;
  TermStats s;
  s.n_docs = profiles.size();
  s.n_pos = n_pos;
  s.n_neg = profiles.size() - n_pos;
  for (const auto& [term, c] : df) {
    if (!within_bounds(c.pos + c.neg, s.n_docs, bounds)) continue;
    terms.push_back(term);
    s.df_total.push_back(c.pos + c.neg);
    s.df_pos.push_back(c.pos);
    s.df_neg.push_back(c.neg);
  }
  if (terms.empty())
    throw DataError("build_vocabulary: no term satisfies " + std::to_string(bounds.min_df) +
                    " < df < " + std::to_string(bounds.max_df_ratio) + " * " +
                    std::to_string(s.n_docs));
  return Vocabulary(std::move(terms), std::move(s), bounds);
}

inline Vocabulary build_vocabulary(const Corpus& corpus, const VocabularyBounds& bounds = {}) {
  return build_vocabulary(std::span<const UserProfile>(corpus.profiles), bounds);
}

// Export schema: {"version":1,"min_df","max_df_ratio","n_docs","n_pos","n_neg",
// "terms":[{"t","df","df_pos","df_neg"},...]}.
inline nlohmann::ordered_json to_json(const Vocabulary& v) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["min_df"] = v.bounds().min_df;
  j["max_df_ratio"] = v.bounds().max_df_ratio;
  j["n_docs"] = v.stats().n_docs;
  j["n_pos"] = v.stats().n_pos;
  j["n_neg"] = v.stats().n_neg;
  auto& terms = j["terms"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < v.size(); ++i) {
    nlohmann::ordered_json t;
    t["t"] = v.term(i);
    t["df"] = v.stats().df_total[i];
    t["df_pos"] = v.stats().df_pos[i];
    t["df_neg"] = v.stats().df_neg[i];
    terms.push_back(std::move(t));
  }
  return j;
}

inline Vocabulary vocabulary_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw DataError("vocabulary: unsupported version");
    VocabularyBounds b{j.at("min_df").get<std::size_t>(), j.at("max_df_ratio").get<double>()};
    TermStats s;
    s.n_docs = j.at("n_docs").get<std::size_t>();
    s.n_pos = j.at("n_pos").get<std::size_t>();
    s.n_neg = j.at("n_neg").get<std::size_t>();
    std::vector<std::string> terms;
    for (const auto& t : j.at("terms")) {
      terms.push_back(t.at("t").get<std::string>());
      s.df_total.push_back(t.at("df").get<std::size_t>());
      s.df_pos.push_back(t.at("df_pos").get<std::size_t>());
      s.df_neg.push_back(t.at("df_neg").get<std::size_t>());
    }
    if (!std::is_sorted(terms.begin(), terms.end()))
      throw DataError("vocabulary: terms are not in lexicographic order");
    return Vocabulary(std::move(terms), std::move(s), b);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("vocabulary: ") + e.what());
  }
}

}  // namespace nssi
