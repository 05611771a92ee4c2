#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "nssi/random.hpp"
#include "nssi/topic_model.hpp"

namespace nssi {
namespace {

constexpr std::size_t kVocab = 50;

// Documents drawn from two planted topics: topic 0 is uniform over words
// [0, 25), topic 1 over [25, 50). Each document mixes them 0.9 / 0.1.
struct Planted {
  std::vector<SparseVector> docs;
  std::vector<std::size_t> dominant;
};

Planted planted_corpus(std::size_t n_docs, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  Planted out;
  for (std::size_t d = 0; d < n_docs; ++d) {
    const std::size_t main = d % 2;
    std::vector<double> counts(kVocab, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t topic = rng.uniform01() < 0.9 ? main : 1 - main;
      counts[topic * 25 + rng.uniform_index(25)] += 1.0;
    }
    SparseVector v(kVocab);
    for (std::size_t w = 0; w < kVocab; ++w) v.push_back(w, counts[w]);
    out.docs.push_back(std::move(v));
    out.dominant.push_back(main);
  }
  return out;
}

double planted_phi(std::size_t topic, std::size_t w) { return w / 25 == topic ? 1.0 / 25 : 0.0; }

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

std::vector<double> planted_row(std::size_t topic) {
  std::vector<double> r(kVocab);
  for (std::size_t w = 0; w < kVocab; ++w) r[w] = planted_phi(topic, w);
  return r;
}

// Best cosine over the two topic permutations; returns per-planted-topic
// cosines and the recovered topic matched to planted topic 0.
std::pair<std::array<double, 2>, std::size_t> match_topics(const TopicModel& m) {
  const auto p0 = planted_row(0), p1 = planted_row(1);
  const double same = cosine(m.phi_row(0), p0) + cosine(m.phi_row(1), p1);
  const double swapped = cosine(m.phi_row(1), p0) + cosine(m.phi_row(0), p1);
  if (same >= swapped) return {{cosine(m.phi_row(0), p0), cosine(m.phi_row(1), p1)}, 0};
  return {{cosine(m.phi_row(1), p0), cosine(m.phi_row(0), p1)}, 1};
}

TEST(FitLda, RejectsBadInput) {
  EXPECT_THROW(fit_lda({}, {}, 1), DataError);
  std::vector<SparseVector> docs{SparseVector(3)};
  EXPECT_THROW(fit_lda(docs, {}, 1), DataError);
  docs = {SparseVector::from_entries(3, {{0, 1.5}})};
  EXPECT_THROW(fit_lda(docs, {}, 1), DataError);
  docs = {SparseVector::from_entries(3, {{0, 1.0}})};
  EXPECT_THROW(fit_lda(docs, {.topics = 0}, 1), DataError);
  EXPECT_THROW(fit_lda(docs, {.topics = 2, .beta = 0.0}, 1), DataError);
}

TEST(FitLda, SingleTopicIsSmoothedEmpiricalDistribution) {
  const auto p = planted_corpus(20, 15, 4);
  const LdaParams params{.topics = 1, .beta = 0.01, .schedule = {50, 20, 5}};
  const auto m = fit_lda(p.docs, params, 7);
  std::vector<double> n_w(kVocab, 0.0);
  double total = 0;
  for (const auto& d : p.docs)
    for (const auto& e : d) {
      n_w[e.index] += e.weight;
      total += e.weight;
    }
  for (std::size_t w = 0; w < kVocab; ++w)
    EXPECT_NEAR(m.phi_at(0, w), (n_w[w] + 0.01) / (total + kVocab * 0.01), 1e-12);
  const auto theta = infer_theta(m, p.docs[0], {}, 3);
  EXPECT_EQ(theta.theta, std::vector<double>{1.0});
}

TEST(FitLda, CountsAreConservedAfterEverySweep) {
  const auto p = planted_corpus(40, 20, 8);
  std::size_t sweeps = 0;
  bool conditional_checked = false;
  auto observer = [&](std::size_t, const SamplerCounts& c) {
    ++sweeps;
    const std::size_t n_docs = c.doc_offsets.size() - 1;
    std::vector<std::uint32_t> recount_dt(n_docs * c.k, 0), recount_wt(c.vocab_size * c.k, 0);
    for (std::size_t d = 0; d < n_docs; ++d) {
      std::uint64_t sum = 0;
      for (std::size_t t = 0; t < c.k; ++t) sum += c.doc_topic[d * c.k + t];
      ASSERT_EQ(sum, c.doc_offsets[d + 1] - c.doc_offsets[d]);
      for (std::size_t i = c.doc_offsets[d]; i < c.doc_offsets[d + 1]; ++i) {
        ++recount_dt[d * c.k + c.topics[i]];
        ++recount_wt[c.words[i] * c.k + c.topics[i]];
      }
    }
    for (std::size_t t = 0; t < c.k; ++t) {
      std::uint64_t sum = 0;
      for (std::size_t w = 0; w < c.vocab_size; ++w) sum += c.word_topic[w * c.k + t];
      ASSERT_EQ(sum, c.topic_total[t]);
    }
    ASSERT_TRUE(std::equal(recount_dt.begin(), recount_dt.end(), c.doc_topic.begin()));
    ASSERT_TRUE(std::equal(recount_wt.begin(), recount_wt.end(), c.word_topic.begin()));

    // Full conditional for a few tokens, with that token removed from a copy
    // of the counts.
    std::vector<std::uint32_t> dt(c.doc_topic.begin(), c.doc_topic.end());
    std::vector<std::uint32_t> wt(c.word_topic.begin(), c.word_topic.end());
    std::vector<std::uint32_t> tt(c.topic_total.begin(), c.topic_total.end());
    for (std::size_t d = 0; d < n_docs; d += 7) {
      const std::size_t i = c.doc_offsets[d];
      const auto t = c.topics[i], w = c.words[i];
      --dt[d * c.k + t];
      --wt[w * c.k + t];
      --tt[t];
      const SamplerCounts excl{c.k, c.vocab_size, dt, wt, tt, c.doc_offsets, c.words, c.topics};
      const auto prob = topic_conditional(excl, d, w, 0.5, 0.01);
      double s = 0;
      for (auto x : prob) {
        ASSERT_GE(x, 0.0);
        s += x;
      }
      ASSERT_NEAR(s, 1.0, 1e-12);
      ++dt[d * c.k + t];
      ++wt[w * c.k + t];
      ++tt[t];
      conditional_checked = true;
    }
  };
  const LdaParams params{.topics = 3, .alpha = 0.5, .beta = 0.01, .schedule = {60, 30, 5}};
  const auto m = fit_lda(p.docs, params, 11, observer);
  EXPECT_EQ(sweeps, 60u);
  EXPECT_TRUE(conditional_checked);
  for (std::size_t t = 0; t < m.k; ++t) {
    const auto row = m.phi_row(t);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
    for (auto x : row) EXPECT_GT(x, 0.0);
  }
}

TEST(FitLda, RecoversTwoPlantedTopics) {
  const auto p = planted_corpus(200, 40, 21);
  const auto start = std::chrono::steady_clock::now();
  const auto m = fit_lda(p.docs, {.topics = 2}, 99);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(elapsed, std::chrono::minutes(2));
  const auto [cos, matched0] = match_topics(m);
  EXPECT_GE(cos[0], 0.9);
  EXPECT_GE(cos[1], 0.9);
}

TEST(FitLda, DeterministicForSeed) {
  const auto p = planted_corpus(30, 20, 2);
  const LdaParams params{.topics = 4, .schedule = {40, 20, 5}};
  const auto a = fit_lda(p.docs, params, 5);
  const auto b = fit_lda(p.docs, params, 5);
  EXPECT_EQ(a.phi, b.phi);
  const auto c = fit_lda(p.docs, params, 6);
  EXPECT_NE(a.phi, c.phi);
}

TEST(InferTheta, SeparableDocumentFindsItsTopic) {
  const auto p = planted_corpus(200, 40, 21);
  const auto m = fit_lda(p.docs, {.topics = 2, .alpha = 0.5}, 99);
  const auto [cos, matched0] = match_topics(m);
  ASSERT_GE(cos[0], 0.9);

  // Pure topic-0 document.
  SparseVector doc(kVocab);
  for (std::size_t w = 0; w < 25; w += 2) doc.push_back(w, 3.0);
  const auto theta = infer_theta(m, doc, {}, 17);
  EXPECT_FALSE(theta.uniform_fallback);
  EXPECT_NEAR(theta.theta[0] + theta.theta[1], 1.0, 1e-9);
  const auto argmax = static_cast<std::size_t>(
      std::max_element(theta.theta.begin(), theta.theta.end()) - theta.theta.begin());
  EXPECT_EQ(argmax, matched0);
  EXPECT_GE(theta.theta[matched0], 0.8);
}

TEST(InferTheta, NormalizedAndDeterministic) {
  const auto p = planted_corpus(50, 20, 3);
  const auto m = fit_lda(p.docs, {.topics = 5, .schedule = {40, 20, 5}}, 1);
  for (std::size_t d = 0; d < p.docs.size(); ++d) {
    const auto a = infer_theta(m, p.docs[d], {20, 10}, d);
    double s = 0;
    for (auto x : a.theta) {
      EXPECT_GT(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
    EXPECT_EQ(a.theta, infer_theta(m, p.docs[d], {20, 10}, d).theta);
  }
}

TEST(InferTheta, EmptyDocumentFallsBackToUniform) {
  const auto p = planted_corpus(10, 10, 3);
  const auto m = fit_lda(p.docs, {.topics = 4, .schedule = {10, 5, 1}}, 1);
  const auto t = infer_theta(m, SparseVector(kVocab), {}, 0);
  EXPECT_TRUE(t.uniform_fallback);
  EXPECT_EQ(t.theta, std::vector<double>(4, 0.25));
  // Out-of-range ids are ignored too.
  const auto oov = infer_theta(m, SparseVector::from_entries(kVocab + 5, {{kVocab + 1, 2.0}}), {}, 0);
  EXPECT_TRUE(oov.uniform_fallback);
}

TEST(TopicModel, JsonRoundTripIsExact) {
  const auto p = planted_corpus(30, 20, 2);
  const auto m = fit_lda(p.docs, {.topics = 3, .schedule = {20, 10, 2}}, 5);
  const auto back = topic_model_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back.phi, m.phi);
  EXPECT_EQ(back.alpha, m.alpha);
  EXPECT_EQ(back.k, m.k);
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_THROW(topic_model_from_json(nlohmann::json::parse(R"({"version":2})")), DataError);
}

}  // namespace
}  // namespace nssi
