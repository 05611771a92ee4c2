#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "features.hpp"
#include "folds.hpp"
#include "logistic_regression.hpp"
#include "metrics.hpp"
#include "naive_bayes.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "topic_model.hpp"
#include "vectorize.hpp"
#include "vocabulary.hpp"

namespace nssi {

// Where TF-IDF document frequencies come from.
enum class IdfScope { per_fold, global };

inline std::string_view to_string(IdfScope s) noexcept {
  return s == IdfScope::per_fold ? "fold" : "global";
}

struct ProtocolConfig {
  std::uint64_t seed = 0;
  std::size_t resamples = 5;
  std::size_t folds = 5;
  VocabularyBounds vocab;
  LdaParams lda;
  FoldInSchedule fold_in;
  double nb_smoothing = 1.0;
  LrOptions lr;
  TfidfOptions tfidf;
  IdfScope idf_scope = IdfScope::per_fold;
  std::vector<Configuration> configurations{kAllConfigurations.begin(), kAllConfigurations.end()};
  // Execution only; never affects results.
  std::size_t jobs = 1;
};

struct RunRecord {
  std::size_t resample = 0;
  std::size_t fold = 0;
  Configuration config;
  ConfusionMatrix cm;
  Metrics metrics;
};

struct RunFlag {
  std::size_t resample = 0;
  std::size_t fold = 0;
  std::string configuration;
  std::string flag;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
};

struct ConfigurationSummary {
  Configuration config;
  std::size_t runs = 0;
  MetricSummary accuracy, precision, recall, f1;
};

struct EvalReport {
  ProtocolConfig config;
  std::size_t n_profiles = 0;
  std::size_t n_positive = 0;
  std::vector<ConfigurationSummary> results;
  std::vector<RunRecord> runs;
  std::vector<RunFlag> flags;

  const ConfigurationSummary& result(const Configuration& c) const {
    for (const auto& r : results)
      if (r.config == c) return r;
    throw Error("report has no configuration " + c.key());
  }
};

// Records which profile ids each fitting step consumed, per (resample, fold).
// Resample-level steps use fold = kResampleLevel.
class FitAudit {
 public:
  static constexpr std::size_t kResampleLevel = SIZE_MAX;

  struct Entry {
    std::size_t resample;
    std::size_t fold;
    std::string step;
    std::vector<std::string> ids;
  };

  void record(std::size_t resample, std::size_t fold, std::string step,
              std::span<const UserProfile> profiles) {
    Entry e{resample, fold, std::move(step), {}};
    e.ids.reserve(profiles.size());
    for (const auto& p : profiles) e.ids.push_back(p.id);
    std::lock_guard lock(mutex_);
    entries_.push_back(std::move(e));
  }

  void record(std::size_t resample, std::size_t fold, std::string step,
              std::vector<std::string> ids) {
    std::lock_guard lock(mutex_);
    entries_.push_back({resample, fold, std::move(step), std::move(ids)});
  }

  // Entries ordered by (resample, fold, step).
  std::vector<Entry> entries() const {
    std::lock_guard lock(mutex_);
    auto out = entries_;
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
      if (a.resample != b.resample) return a.resample < b.resample;
      if (a.fold != b.fold) return a.fold < b.fold;
      return a.step < b.step;
    });
    return out;
  }

 private:
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
};

inline constexpr std::uint64_t kResampleStream = 0x7265'7361'6d70'6c65ULL;
inline constexpr std::uint64_t kFoldStream = 0x666f'6c64'7370'6c74ULL;
inline constexpr std::uint64_t kLdaStream = 0x6c64'6166'6974'0000ULL;

// seed(r, fold) for one cross-validation unit.
inline std::uint64_t unit_seed(std::uint64_t master, std::size_t resample, std::size_t fold) {
  return derive_seed(master, resample, fold);
}

inline void validate(const ProtocolConfig& c) {
  if (c.resamples < 1) throw DataError("protocol: resamples must be at least 1");
  if (c.folds < 2) throw DataError("protocol: folds must be at least 2");
  if (c.configurations.empty()) throw DataError("protocol: no configurations selected");
  for (std::size_t i = 0; i < c.configurations.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (c.configurations[i] == c.configurations[j])
        throw DataError("protocol: configuration " + c.configurations[i].key() + " listed twice");
  if (c.lda.topics < 1) throw DataError("protocol: topics must be at least 1");
  if (!(c.nb_smoothing > 0.0)) throw DataError("protocol: nb smoothing must be positive");
}

namespace detail {

inline MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  for (auto x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (auto x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

inline std::vector<Label> labels_of(std::span<const UserProfile> profiles) {
  std::vector<Label> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back(p.label);
  return out;
}

struct UnitResult {
  std::vector<RunRecord> runs;
  std::vector<RunFlag> flags;
};

}  // namespace detail

// Balanced resample -> vocabulary on the balanced set -> stratified folds ->
// per fold: IDF, LDA and classifiers fitted on the training split only, scored
// on the test split. Results depend only on the corpus and config (not jobs).
inline EvalReport run_protocol(const Corpus& corpus, const ProtocolConfig& config,
                               FitAudit* audit = nullptr) {
  validate(config);
  validate(corpus);
  require_both_classes(corpus);
  const std::size_t n_pos = corpus.count(Label::positive);
  if (n_pos < config.folds)
    throw DataError("protocol: need at least " + std::to_string(config.folds) +
                    " profiles per class, have " + std::to_string(n_pos) + " positives");

  bool need_tfidf = false, need_lda = false;
  for (const auto& c : config.configurations) {
    need_tfidf |= c.features == Representation::tfidf;
    need_lda |= c.features == Representation::lda;
  }

  // Resample-level preparation is sequential and cheap.
  std::vector<Corpus> balanced;
  std::vector<Vocabulary> vocabs;
  std::vector<FoldPlan> plans;
  for (std::size_t r = 0; r < config.resamples; ++r) {
    try {
      balanced.push_back(balanced_resample(corpus, derive_seed(config.seed, kResampleStream, r)));
      vocabs.push_back(build_vocabulary(balanced.back(), config.vocab));
      plans.push_back(stratified_folds(balanced.back(), config.folds,
                                       derive_seed(config.seed, kFoldStream, r)));
    } catch (const Error& e) {
      throw Error("resample " + std::to_string(r) + ": " + e.what());
    }
    if (audit)
      audit->record(r, FitAudit::kResampleLevel, "vocabulary_terms",
                    std::span<const UserProfile>(balanced.back().profiles));
  }

  const std::size_t n_units = config.resamples * config.folds;
  std::vector<detail::UnitResult> unit_results(n_units);

  auto run_unit = [&](std::size_t u) {
    const std::size_t r = u / config.folds;
    const std::size_t f = u % config.folds;
    const std::string where = "resample " + std::to_string(r) + ", fold " + std::to_string(f);
    const auto& all = balanced[r].profiles;
    const auto& vocab = vocabs[r];
    const auto train = select(all, plans[r].train_indices(f));
    const auto test = select(all, plans[r].test_indices(f));
    const auto train_y = detail::labels_of(train);
    const auto test_y = detail::labels_of(test);
    auto& out = unit_results[u];

    if (audit) audit->record(r, f, "test_split", std::span<const UserProfile>(test));

    std::vector<SparseVector> train_x[3], test_x[3];
    const auto slot = [](Representation rep) { return static_cast<std::size_t>(rep); };
    train_x[slot(Representation::count)] = count_vectors(train, vocab);
    test_x[slot(Representation::count)] = count_vectors(test, vocab);
    const auto& train_counts = train_x[slot(Representation::count)];
    const auto& test_counts = test_x[slot(Representation::count)];

    if (need_tfidf) {
      std::vector<double> weights;
      if (config.idf_scope == IdfScope::per_fold) {
        if (audit) audit->record(r, f, "idf", std::span<const UserProfile>(train));
        weights = idf(vocab.recount(train).stats(), config.tfidf);
      } else {
        if (audit) audit->record(r, f, "idf", std::span<const UserProfile>(all));
        weights = idf(vocab.stats(), config.tfidf);
      }
      for (const auto& v : train_counts)
        train_x[slot(Representation::tfidf)].push_back(tfidf_from_counts(v, weights, config.tfidf));
      for (const auto& v : test_counts)
        test_x[slot(Representation::tfidf)].push_back(tfidf_from_counts(v, weights, config.tfidf));
    }

    if (need_lda) {
      std::vector<SparseVector> docs;
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (train_counts[i].empty()) continue;
        docs.push_back(train_counts[i]);
        ids.push_back(train[i].id);
      }
      if (docs.empty()) throw Error(where + ": no training profile has in-vocabulary interests");
      if (audit) audit->record(r, f, "lda", std::move(ids));
      TopicModel model;
      try {
        model = fit_lda(docs, config.lda, derive_seed(unit_seed(config.seed, r, f), kLdaStream));
      } catch (const Error& e) {
        throw Error(where + ", lda: " + e.what());
      }
      std::size_t fallbacks = 0;
      auto mixtures = [&](std::span<const UserProfile> profiles,
                          const std::vector<SparseVector>& counts, std::vector<SparseVector>& dst) {
        for (std::size_t i = 0; i < profiles.size(); ++i) {
          const auto mix =
              infer_theta(model, counts[i], config.fold_in, fold_in_seed(model, profiles[i].id));
          fallbacks += mix.uniform_fallback;
          dst.push_back(to_sparse(mix));
        }
      };
      mixtures(train, train_counts, train_x[slot(Representation::lda)]);
      mixtures(test, test_counts, test_x[slot(Representation::lda)]);
      if (fallbacks > 0)
        out.flags.push_back({r, f, "lda",
                             "uniform topic mixture for " + std::to_string(fallbacks) +
                                 " profile(s) without in-vocabulary interests"});
    }

    for (const auto& c : config.configurations) {
      try {
        const auto& xtr = train_x[slot(c.features)];
        const auto& xte = test_x[slot(c.features)];
        if (audit) audit->record(r, f, "classifier:" + c.key(), std::span<const UserProfile>(train));
        std::vector<Label> predicted;
        predicted.reserve(xte.size());
        if (c.classifier == ClassifierKind::nb) {
          const auto m = train_nb(xtr, train_y, config.nb_smoothing);
          for (const auto& v : xte) predicted.push_back(predict(m, v));
        } else {
          const auto m = train_lr(xtr, train_y, config.lr);
          for (const auto& v : xte) predicted.push_back(predict(m, v));
        }
        RunRecord rec{r, f, c, confusion(test_y, predicted), {}};
        rec.metrics = metrics(rec.cm);
        if (rec.metrics.precision_undefined)
          out.flags.push_back({r, f, c.key(), "precision undefined (no predicted positives)"});
        if (rec.metrics.recall_undefined)
          out.flags.push_back({r, f, c.key(), "recall undefined (no positive test profiles)"});
        if (rec.metrics.f1_undefined) out.flags.push_back({r, f, c.key(), "f1 undefined"});
        out.runs.push_back(rec);
      } catch (const Error& e) {
        throw Error(where + ", configuration " + c.key() + ": " + e.what());
      }
    }
  };

  parallel_for(n_units, config.jobs, run_unit);

  EvalReport report;
  report.config = config;
  report.n_profiles = corpus.size();
  report.n_positive = n_pos;
  for (auto& u : unit_results) {
    report.runs.insert(report.runs.end(), u.runs.begin(), u.runs.end());
    report.flags.insert(report.flags.end(), u.flags.begin(), u.flags.end());
  }
  for (const auto& c : config.configurations) {
    std::vector<double> acc, prec, rec, f1;
    for (const auto& run : report.runs) {
      if (!(run.config == c)) continue;
      acc.push_back(run.metrics.accuracy);
      prec.push_back(run.metrics.precision);
      rec.push_back(run.metrics.recall);
      f1.push_back(run.metrics.f1);
    }
    report.results.push_back({c, acc.size(), detail::summarize(acc), detail::summarize(prec),
                              detail::summarize(rec), detail::summarize(f1)});
  }
  return report;
}

inline nlohmann::ordered_json config_to_json(const ProtocolConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["resamples"] = c.resamples;
  j["folds"] = c.folds;
  j["min_df"] = c.vocab.min_df;
  j["max_df_ratio"] = c.vocab.max_df_ratio;
  j["topics"] = c.lda.topics;
  j["alpha"] = c.lda.resolved_alpha();
  j["beta"] = c.lda.beta;
  j["lda_train_iters"] = c.lda.schedule.train_iters;
  j["lda_burn_in"] = c.lda.schedule.burn_in;
  j["lda_sample_lag"] = c.lda.schedule.sample_lag;
  j["fold_in_iters"] = c.fold_in.iters;
  j["fold_in_burn_in"] = c.fold_in.burn_in;
  j["nb_smoothing"] = c.nb_smoothing;
  j["lr_lambda"] = c.lr.lambda;
  j["lr_tol"] = c.lr.tol;
  j["lr_max_iter"] = c.lr.max_iter;
  j["idf_scope"] = to_string(c.idf_scope);
  j["smooth_idf"] = c.tfidf.smooth_idf;
  j["l2_normalize"] = c.tfidf.l2_normalize;
  auto& keys = j["configurations"] = nlohmann::ordered_json::array();
  for (const auto& cfg : c.configurations) keys.push_back(cfg.key());
  return j;
}

inline nlohmann::ordered_json to_json(const EvalReport& report) {
  auto summary = [](const MetricSummary& s) {
    nlohmann::ordered_json j;
    j["mean"] = s.mean;
    j["std"] = s.std;
    return j;
  };
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["config"] = config_to_json(report.config);
  j["config"]["n_profiles"] = report.n_profiles;
  j["config"]["n_positive"] = report.n_positive;
  auto& results = j["results"] = nlohmann::ordered_json::object();
  for (const auto& r : report.results) {
    auto& o = results[r.config.key()];
    o["accuracy"] = summary(r.accuracy);
    o["precision"] = summary(r.precision);
    o["recall"] = summary(r.recall);
    o["f1"] = summary(r.f1);
    o["runs"] = r.runs;
  }
  auto& flags = j["flags"] = nlohmann::ordered_json::array();
  for (const auto& f : report.flags) {
    nlohmann::ordered_json o;
    o["resample"] = f.resample;
    o["fold"] = f.fold;
    o["configuration"] = f.configuration;
    o["flag"] = f.flag;
    flags.push_back(std::move(o));
  }
  auto& runs = j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : report.runs) {
    nlohmann::ordered_json o;
    o["resample"] = r.resample;
    o["fold"] = r.fold;
    o["configuration"] = r.config.key();
    o["tp"] = r.cm.tp;
    o["fp"] = r.cm.fp;
    o["tn"] = r.cm.tn;
    o["fn"] = r.cm.fn;
    o["accuracy"] = r.metrics.accuracy;
    o["precision"] = r.metrics.precision;
    o["recall"] = r.metrics.recall;
    o["f1"] = r.metrics.f1;
    runs.push_back(std::move(o));
  }
  return j;
}

// Aligned text table, one row per configuration: mean (std) per metric.
inline std::string render_table(const EvalReport& report) {
  std::size_t name_width = std::string("Feature Vector (Classifier)").size();
  for (const auto& r : report.results)
    name_width = std::max(name_width, r.config.display_name().size());
  std::ostringstream os;
  char cell[64];
  auto pad = [&](const std::string& s, std::size_t w) {
    os << s << std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  pad("Feature Vector (Classifier)", name_width + 2);
  for (const char* h : {"Accuracy", "Precision", "Recall", "F1 Score"}) pad(h, 18);
  os << "Runs\n";
  for (const auto& r : report.results) {
    pad(r.config.display_name(), name_width + 2);
    for (const auto* s : {&r.accuracy, &r.precision, &r.recall, &r.f1}) {
      std::snprintf(cell, sizeof cell, "%.4f (%.4f)", s->mean, s->std);
      pad(cell, 18);
    }
    os << r.runs << '\n';
  }
  return os.str();
}

}  // namespace nssi
