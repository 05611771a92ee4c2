#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "nssi/protocol.hpp"
#include "nssi/synth.hpp"

namespace nssi {
namespace {

// Small-scale protocol settings so each test runs in well under a second.
ProtocolConfig quick_config(std::uint64_t seed) {
  ProtocolConfig cfg;
  cfg.seed = seed;
  cfg.resamples = 2;
  cfg.folds = 3;
  cfg.vocab = {3, 0.7};
  cfg.lda.topics = 4;
  cfg.lda.schedule = {60, 40, 5};
  cfg.fold_in = {20, 10};
  return cfg;
}

Corpus unbalanced(double separation, std::uint64_t seed) {
  auto c = generate({.n_per_class = 60, .vocab_size = 120, .interests_per_user = 12,
                     .separation = separation, .signature_size = 5, .seed = seed});
  // Extra negatives so resampling actually samples.
  auto extra = generate({.n_per_class = 30, .vocab_size = 120, .interests_per_user = 12,
                         .separation = separation, .signature_size = 5, .seed = seed + 100});
  for (auto& p : extra.profiles) {
    if (p.label != Label::negative) continue;
    p.id = "extra-" + p.id;
    c.profiles.push_back(p);
  }
  return c;
}

TEST(Protocol, ReportHasSixRowsInTableOrder) {
  const auto report = run_protocol(unbalanced(0.5, 1), quick_config(1));
  ASSERT_EQ(report.results.size(), 6u);
  const std::vector<std::string> names{"Simple-Count (NB)", "TF-IDF (NB)",
                                       "LDA-Topic-Distribution (NB)", "Simple-Count (LR)",
                                       "TF-IDF (LR)", "LDA-Topic-Distribution (LR)"};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(report.results[i].config.display_name(), names[i]);
    EXPECT_EQ(report.results[i].runs, 6u);
    for (const auto* m : {&report.results[i].accuracy, &report.results[i].precision,
                          &report.results[i].recall, &report.results[i].f1}) {
      EXPECT_GE(m->mean, 0.0);
      EXPECT_LE(m->mean, 1.0);
      EXPECT_GE(m->std, 0.0);
    }
  }
  EXPECT_EQ(report.runs.size(), 36u);
  const auto table = render_table(report);
  for (const auto& n : names) EXPECT_NE(table.find(n), std::string::npos);
  const auto j = to_json(report);
  EXPECT_EQ(j["version"], 1);
  EXPECT_TRUE(j["results"].contains("tfidf_lr"));
  EXPECT_TRUE(j["results"]["lda_nb"]["accuracy"].contains("std"));
}

TEST(Protocol, SeparableCorpusIsLearned) {
  auto cfg = quick_config(2);
  const auto report = run_protocol(unbalanced(1.0, 2), cfg);
  for (const auto& r : report.results) EXPECT_GE(r.accuracy.mean, 0.95) << r.config.key();
}

TEST(Protocol, ShuffledLabelsGiveChance) {
  auto c = generate({.n_per_class = 300, .vocab_size = 200, .interests_per_user = 12,
                     .separation = 1.0, .signature_size = 5, .seed = 3});
  std::vector<Label> labels;
  for (const auto& p : c.profiles) labels.push_back(p.label);
  Rng rng(99);
  rng.shuffle(std::span<Label>(labels));
  for (std::size_t i = 0; i < labels.size(); ++i) c.profiles[i].label = labels[i];
  auto cfg = quick_config(3);
  cfg.resamples = 3;
  cfg.folds = 5;
  const auto report = run_protocol(c, cfg);
  for (const auto& r : report.results) EXPECT_NEAR(r.accuracy.mean, 0.5, 0.05) << r.config.key();
}

TEST(Protocol, DeterministicAcrossJobCounts) {
  const auto c = unbalanced(0.4, 4);
  auto cfg = quick_config(4);
  cfg.jobs = 1;
  const auto a = to_json(run_protocol(c, cfg)).dump();
  cfg.jobs = 4;
  const auto b = to_json(run_protocol(c, cfg)).dump();
  EXPECT_EQ(a, b);
  cfg.seed = 5;
  EXPECT_NE(to_json(run_protocol(c, cfg)).dump(), a);
}

TEST(Protocol, FittingStepsNeverSeeTestProfiles) {
  const auto c = unbalanced(0.5, 6);
  FitAudit audit;
  auto cfg = quick_config(6);
  cfg.jobs = 3;
  run_protocol(c, cfg, &audit);

  std::map<std::pair<std::size_t, std::size_t>, std::set<std::string>> test_ids;
  for (const auto& e : audit.entries())
    if (e.step == "test_split") test_ids[{e.resample, e.fold}].insert(e.ids.begin(), e.ids.end());
  ASSERT_EQ(test_ids.size(), cfg.resamples * cfg.folds);

  std::set<std::string> steps;
  for (const auto& e : audit.entries()) {
    if (e.fold == FitAudit::kResampleLevel || e.step == "test_split") continue;
    steps.insert(e.step);
    const auto& test = test_ids.at({e.resample, e.fold});
    for (const auto& id : e.ids) EXPECT_EQ(test.count(id), 0u) << e.step << " touched " << id;
    EXPECT_FALSE(e.ids.empty());
  }
  EXPECT_TRUE(steps.count("idf"));
  EXPECT_TRUE(steps.count("lda"));
  EXPECT_TRUE(steps.count("classifier:tfidf_lr"));
  EXPECT_EQ(steps.size(), 2u + 6u);
}

TEST(Protocol, GlobalIdfScopeIsVisibleToTheAudit) {
  const auto c = unbalanced(0.5, 6);
  FitAudit audit;
  auto cfg = quick_config(6);
  cfg.idf_scope = IdfScope::global;
  cfg.configurations = {{Representation::tfidf, ClassifierKind::nb}};
  run_protocol(c, cfg, &audit);
  std::map<std::pair<std::size_t, std::size_t>, std::set<std::string>> test_ids;
  for (const auto& e : audit.entries())
    if (e.step == "test_split") test_ids[{e.resample, e.fold}].insert(e.ids.begin(), e.ids.end());
  bool leaked = false;
  for (const auto& e : audit.entries())
    if (e.step == "idf")
      for (const auto& id : e.ids) leaked |= test_ids.at({e.resample, e.fold}).count(id) > 0;
  EXPECT_TRUE(leaked);
}

TEST(Protocol, FilteredConfigurations) {
  auto cfg = quick_config(7);
  cfg.configurations = {{Representation::tfidf, ClassifierKind::lr}};
  const auto report = run_protocol(unbalanced(0.5, 7), cfg);
  ASSERT_EQ(report.results.size(), 1u);
  EXPECT_EQ(report.results[0].config.key(), "tfidf_lr");
}

TEST(Protocol, ErrorsAreAnnotated) {
  auto cfg = quick_config(8);
  cfg.vocab = {10000, 0.7};
  try {
    run_protocol(unbalanced(0.5, 8), cfg);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("resample 0"), std::string::npos) << e.what();
  }
  cfg = quick_config(8);
  cfg.folds = 100;
  EXPECT_THROW(run_protocol(unbalanced(0.5, 8), cfg), DataError);
  cfg = quick_config(8);
  cfg.configurations.push_back(cfg.configurations.front());
  EXPECT_THROW(run_protocol(unbalanced(0.5, 8), cfg), DataError);
}

TEST(Protocol, SummaryUsesSampleStandardDeviation) {
  const auto s = detail::summarize({0.5, 0.7, 0.9});
  EXPECT_NEAR(s.mean, 0.7, 1e-15);
  EXPECT_NEAR(s.std, 0.2, 1e-15);
  EXPECT_EQ(detail::summarize({0.4}).std, 0.0);
}

TEST(Protocol, UnitSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t f = 0; f < 5; ++f) seen.insert(unit_seed(42, r, f));
  EXPECT_EQ(seen.size(), 25u);
  EXPECT_EQ(unit_seed(42, 1, 2), unit_seed(42, 1, 2));
}

}  // namespace
}  // namespace nssi
