#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "random.hpp"
#include "sparse_vector.hpp"

namespace nssi {

struct LdaSchedule {
  std::size_t train_iters = 1000;
  std::size_t burn_in = 800;
  std::size_t sample_lag = 10;
};

struct FoldInSchedule {
  std::size_t iters = 100;
  std::size_t burn_in = 50;
};

struct LdaParams {
  std::size_t topics = 10;
  // Non-positive means "use 50 / topics".
  double alpha = 0.0;
  double beta = 0.01;
  LdaSchedule schedule;

  double resolved_alpha() const { return alpha > 0.0 ? alpha : 50.0 / static_cast<double>(topics); }
};

// Fitted LDA: phi is a row-major topics x vocab_size matrix of topic-word
// probabilities.
struct TopicModel {
  std::size_t k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t vocab_size = 0;
  std::vector<double> phi;
  LdaSchedule schedule;
  std::uint64_t seed = 0;

  std::span<const double> phi_row(std::size_t t) const {
    return std::span<const double>(phi).subspan(t * vocab_size, vocab_size);
  }
  double phi_at(std::size_t t, std::size_t w) const { return phi[t * vocab_size + w]; }
};

struct TopicMixture {
  std::vector<double> theta;
  // Set when the document had no in-vocabulary tokens and theta is uniform.
  bool uniform_fallback = false;
};

// Read-only view of the collapsed sampler's counts, handed to sweep observers.
struct SamplerCounts {
  std::size_t k;
  std::size_t vocab_size;
  std::span<const std::uint32_t> doc_topic;    // docs x k
  std::span<const std::uint32_t> word_topic;   // vocab_size x k
  std::span<const std::uint32_t> topic_total;  // k
  std::span<const std::size_t> doc_offsets;    // docs + 1, token ranges
  std::span<const std::uint32_t> words;        // token word ids
  std::span<const std::uint32_t> topics;       // token topic assignments
};

using SweepObserver = std::function<void(std::size_t sweep, const SamplerCounts&)>;

// Normalized full conditional p(z = t | rest) for a token of `word` in `doc`,
// given counts that already exclude that token:
//   (n_dt + alpha) * (n_tw + beta) / (n_t + V beta).
inline std::vector<double> topic_conditional(const SamplerCounts& c, std::size_t doc,
                                             std::size_t word, double alpha, double beta) {
  std::vector<double> p(c.k);
  const double vbeta = static_cast<double>(c.vocab_size) * beta;
  double total = 0.0;
  for (std::size_t t = 0; t < c.k; ++t) {
    p[t] = (c.doc_topic[doc * c.k + t] + alpha) * (c.word_topic[word * c.k + t] + beta) /
           (c.topic_total[t] + vbeta);
    total += p[t];
  }
  for (auto& x : p) x /= total;
  return p;
}

namespace detail {

// Expands count vectors into token word ids. Weights must be whole numbers.
inline void expand_tokens(const SparseVector& doc, std::size_t vocab_size,
                          std::vector<std::uint32_t>& words, bool skip_oov) {
  for (const auto& e : doc) {
    if (e.index >= vocab_size) {
      if (skip_oov) continue;
      throw DataError("lda: word index out of range");
    }
    const double r = std::round(e.weight);
    if (std::abs(r - e.weight) > 1e-9)
      throw DataError("lda: token counts must be whole numbers");
    for (std::size_t c = 0; c < static_cast<std::size_t>(r); ++c)
      words.push_back(static_cast<std::uint32_t>(e.index));
  }
}

}  // namespace detail

// Collapsed Gibbs sampling. phi is averaged over the smoothed estimates
// (n_tw + beta) / (n_t + V beta) taken after sweeps burn_in + lag, burn_in + 2 lag, ...
// When no sweep qualifies, the final state is used.
inline TopicModel fit_lda(std::span<const SparseVector> docs, const LdaParams& params,
                          std::uint64_t seed, const SweepObserver& observer = {}) {
  if (docs.empty()) throw DataError("fit_lda: empty document list");
  if (params.topics < 1) throw DataError("fit_lda: topic count must be at least 1");
  const double alpha = params.resolved_alpha();
  const double beta = params.beta;
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DataError("fit_lda: alpha and beta must be positive");
  if (params.schedule.sample_lag < 1) throw DataError("fit_lda: sample_lag must be at least 1");

  const std::size_t k = params.topics;
  const std::size_t vocab_size = docs.front().dim();
  if (vocab_size == 0) throw DataError("fit_lda: zero-dimensional documents");

  std::vector<std::uint32_t> words;
  std::vector<std::size_t> offsets{0};
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].dim() != vocab_size) throw DataError("fit_lda: documents differ in dimension");
    detail::expand_tokens(docs[d], vocab_size, words, false);
    if (words.size() == offsets.back())
      throw DataError("fit_lda: document " + std::to_string(d) + " has zero tokens");
    offsets.push_back(words.size());
  }

  const std::size_t n_docs = docs.size();
  std::vector<std::uint32_t> topics(words.size());
  std::vector<std::uint32_t> doc_topic(n_docs * k, 0);
  std::vector<std::uint32_t> word_topic(vocab_size * k, 0);
  std::vector<std::uint32_t> topic_total(k, 0);

  Rng rng(seed);
  for (std::size_t d = 0; d < n_docs; ++d) {
    for (std::size_t i = offsets[d]; i < offsets[d + 1]; ++i) {
      const auto t = static_cast<std::uint32_t>(rng.uniform_index(k));
      topics[i] = t;
      ++doc_topic[d * k + t];
      ++word_topic[words[i] * k + t];
      ++topic_total[t];
    }
  }

  const SamplerCounts view{k,          vocab_size, doc_topic, word_topic, topic_total,
                           offsets,    words,      topics};
  const double vbeta = static_cast<double>(vocab_size) * beta;
  std::vector<double> inv_total(k);
  for (std::size_t t = 0; t < k; ++t) inv_total[t] = 1.0 / (topic_total[t] + vbeta);
  std::vector<double> cumulative(k);
  std::vector<double> phi_sum(k * vocab_size, 0.0);
  std::size_t samples = 0;

  auto accumulate_phi = [&] {
    for (std::size_t w = 0; w < vocab_size; ++w)
      for (std::size_t t = 0; t < k; ++t)
        phi_sum[t * vocab_size + w] += (word_topic[w * k + t] + beta) / (topic_total[t] + vbeta);
    ++samples;
  };

  const auto& sched = params.schedule;
  for (std::size_t sweep = 1; sweep <= sched.train_iters; ++sweep) {
    for (std::size_t d = 0; d < n_docs; ++d) {
      std::uint32_t* nd = &doc_topic[d * k];
      for (std::size_t i = offsets[d]; i < offsets[d + 1]; ++i) {
        std::uint32_t* nw = &word_topic[words[i] * k];
        std::uint32_t t = topics[i];
        --nd[t];
        --nw[t];
        inv_total[t] = 1.0 / (--topic_total[t] + vbeta);

        double total = 0.0;
        for (std::size_t s = 0; s < k; ++s) {
          total += (nd[s] + alpha) * (nw[s] + beta) * inv_total[s];
          cumulative[s] = total;
        }
        t = static_cast<std::uint32_t>(rng.categorical(cumulative));

        topics[i] = t;
        ++nd[t];
        ++nw[t];
        inv_total[t] = 1.0 / (++topic_total[t] + vbeta);
      }
    }
    if (observer) observer(sweep, view);
    if (sweep > sched.burn_in && (sweep - sched.burn_in) % sched.sample_lag == 0) accumulate_phi();
  }
  if (samples == 0) accumulate_phi();

  TopicModel m;
  m.k = k;
  m.alpha = alpha;
  m.beta = beta;
  m.vocab_size = vocab_size;
  m.schedule = sched;
  m.seed = seed;
  m.phi.resize(k * vocab_size);
  for (std::size_t t = 0; t < k; ++t) {
    double row = 0.0;
    for (std::size_t w = 0; w < vocab_size; ++w) row += phi_sum[t * vocab_size + w];
    for (std::size_t w = 0; w < vocab_size; ++w)
      m.phi[t * vocab_size + w] = phi_sum[t * vocab_size + w] / row;
  }
  return m;
}

// Fold-in inference with phi held fixed:
//   p(z = t | rest) proportional to (n_dt + alpha) * phi[t][w],
// theta averaged over (n_dt + alpha) / (len + k alpha) after each post-burn-in
// sweep. Out-of-range word ids are ignored; an empty document yields a uniform
// mixture with uniform_fallback set.
inline TopicMixture infer_theta(const TopicModel& model, const SparseVector& doc,
                                const FoldInSchedule& sched, std::uint64_t seed) {
  const std::size_t k = model.k;
  TopicMixture out;
  std::vector<std::uint32_t> words;
  detail::expand_tokens(doc, model.vocab_size, words, true);
  if (words.empty()) {
    out.theta.assign(k, 1.0 / static_cast<double>(k));
    out.uniform_fallback = true;
    return out;
  }

  Rng rng(seed);
  std::vector<std::uint32_t> topics(words.size());
  std::vector<std::uint32_t> nd(k, 0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    topics[i] = static_cast<std::uint32_t>(rng.uniform_index(k));
    ++nd[topics[i]];
  }

  const double alpha = model.alpha;
  const double denom = static_cast<double>(words.size()) + static_cast<double>(k) * alpha;
  std::vector<double> cumulative(k);
  std::vector<double> theta_sum(k, 0.0);
  std::size_t samples = 0;
  auto accumulate = [&] {
    for (std::size_t t = 0; t < k; ++t) theta_sum[t] += (nd[t] + alpha) / denom;
    ++samples;
  };

  for (std::size_t sweep = 1; sweep <= sched.iters; ++sweep) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      const std::uint32_t w = words[i];
      --nd[topics[i]];
      double total = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        total += (nd[t] + alpha) * model.phi[t * model.vocab_size + w];
        cumulative[t] = total;
      }
      topics[i] = static_cast<std::uint32_t>(rng.categorical(cumulative));
      ++nd[topics[i]];
    }
    if (sweep > sched.burn_in) accumulate();
  }
  if (samples == 0) accumulate();

  double total = 0.0;
  for (auto x : theta_sum) total += x;
  out.theta.resize(k);
  for (std::size_t t = 0; t < k; ++t) out.theta[t] = theta_sum[t] / total;
  return out;
}

// Per-profile fold-in stream, independent of the order profiles are visited.
inline std::uint64_t fold_in_seed(const TopicModel& m, std::string_view profile_id) {
  return derive_seed(m.seed, fnv1a64(profile_id));
}

inline SparseVector to_sparse(const TopicMixture& m) {
  SparseVector v(m.theta.size());
  for (std::size_t t = 0; t < m.theta.size(); ++t) v.push_back(t, m.theta[t]);
  return v;
}

inline nlohmann::ordered_json to_json(const TopicModel& m) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["k"] = m.k;
  j["alpha"] = m.alpha;
  j["beta"] = m.beta;
  j["vocab_size"] = m.vocab_size;
  auto& rows = j["phi"] = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < m.k; ++t) {
    auto r = m.phi_row(t);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["seed"] = m.seed;
  return j;
}

inline TopicModel topic_model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw DataError("topic model: unsupported version");
    TopicModel m;
    m.k = j.at("k").get<std::size_t>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.vocab_size = j.at("vocab_size").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& rows = j.at("phi");
    if (rows.size() != m.k) throw DataError("topic model: phi has wrong row count");
    for (const auto& r : rows) {
      if (r.size() != m.vocab_size) throw DataError("topic model: phi row has wrong length");
      for (const auto& x : r) m.phi.push_back(x.get<double>());
    }
    if (m.k == 0 || !(m.alpha > 0.0) || !(m.beta > 0.0))
      throw DataError("topic model: invalid hyperparameters");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("topic model: ") + e.what());
  }
}

}  // namespace nssi
