#pragma once

// Tunables shared by the nssi subcommands. An optional JSON config file
// supplies values first; command-line flags override it.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nssi/features.hpp"
#include "nssi/pipeline.hpp"
#include "nssi/protocol.hpp"
#include "nssi/synth.hpp"

namespace nssi::cli {

// Bad flags or config values; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::size_t min_df = 100;
  double max_df_ratio = 0.70;
  std::size_t k_folds = 5;
  std::size_t resamples = 5;
  std::size_t topics = 10;
  double alpha = 0.0;  // 0 -> 50 / topics
  double beta = 0.01;
  std::size_t lda_iters = 1000;
  std::size_t lda_burn_in = 800;
  std::size_t lda_sample_lag = 10;
  std::size_t fold_in_iters = 100;
  std::size_t fold_in_burn_in = 50;
  double lr_lambda = 1.0;
  double lr_tol = 1e-6;
  std::size_t lr_max_iter = 1000;
  double nb_smoothing = 1.0;
  std::string idf_scope = "fold";
  bool smooth_idf = false;
  bool l2_normalize = false;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;

  std::vector<std::string> features;  // empty -> all (evaluate) / tfidf (train)
  std::vector<std::string> models;    // empty -> all (evaluate) / lr (train)

  // synth
  std::size_t n_per_class = 100;
  std::size_t vocab_size = 1264;
  double interests_per_user = 26.2;
  double separation = 0.5;
  std::size_t signature_size = 10;

  // rank
  std::size_t top = 20;
  std::string estimator = "odds-ratio";

  // paths
  std::string corpus;
  std::string out;
  std::string out_json;
  std::string out_table;
  std::string model_path;
  std::string vocab_path;
  std::string topics_path;
};

namespace detail {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(std::string("config: invalid value for '") + key + "'");
  }
}

}  // namespace detail

// Recognized keys mirror RunConfig field names (snake_case).
inline RunConfig run_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "min_df",      "max_df_ratio", "k_folds",        "resamples",     "topics",
      "alpha",       "beta",         "lda_iters",      "lda_burn_in",   "lda_sample_lag",
      "fold_in_iters", "fold_in_burn_in", "lr_lambda", "lr_tol",        "lr_max_iter",
      "nb_smoothing", "idf_scope",   "smooth_idf",     "l2_normalize",  "seed",
      "jobs",        "features",     "models",         "n_per_class",   "vocab_size",
      "interests_per_user", "separation", "signature_size", "top",      "estimator",
      "corpus",      "out",          "out_json",       "out_table",     "model_path",
      "vocab_path",  "topics_path"};
  if (!j.is_object()) throw UsageError("config: top level must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw UsageError("config: unknown key '" + key + "'");

  RunConfig c;
  using detail::take;
  take(j, "min_df", c.min_df);
  take(j, "max_df_ratio", c.max_df_ratio);
  take(j, "k_folds", c.k_folds);
  take(j, "resamples", c.resamples);
  take(j, "topics", c.topics);
  take(j, "alpha", c.alpha);
  take(j, "beta", c.beta);
  take(j, "lda_iters", c.lda_iters);
  take(j, "lda_burn_in", c.lda_burn_in);
  take(j, "lda_sample_lag", c.lda_sample_lag);
  take(j, "fold_in_iters", c.fold_in_iters);
  take(j, "fold_in_burn_in", c.fold_in_burn_in);
  take(j, "lr_lambda", c.lr_lambda);
  take(j, "lr_tol", c.lr_tol);
  take(j, "lr_max_iter", c.lr_max_iter);
  take(j, "nb_smoothing", c.nb_smoothing);
  take(j, "idf_scope", c.idf_scope);
  take(j, "smooth_idf", c.smooth_idf);
  take(j, "l2_normalize", c.l2_normalize);
  if (j.contains("seed")) {
    std::uint64_t s = 0;
    take(j, "seed", s);
    c.seed = s;
  }
  take(j, "jobs", c.jobs);
  take(j, "features", c.features);
  take(j, "models", c.models);
  take(j, "n_per_class", c.n_per_class);
  take(j, "vocab_size", c.vocab_size);
  take(j, "interests_per_user", c.interests_per_user);
  take(j, "separation", c.separation);
  take(j, "signature_size", c.signature_size);
  take(j, "top", c.top);
  take(j, "estimator", c.estimator);
  take(j, "corpus", c.corpus);
  take(j, "out", c.out);
  take(j, "out_json", c.out_json);
  take(j, "out_table", c.out_table);
  take(j, "model_path", c.model_path);
  take(j, "vocab_path", c.vocab_path);
  take(j, "topics_path", c.topics_path);
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  try {
    return run_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("--config: " + path + ": parse error at byte " + std::to_string(e.byte));
  }
}

// Range checks for values that may have come from a config file (flags are
// also checked by the parser). Messages name the flag.
inline void validate(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw UsageError(m); };
  if (!(c.max_df_ratio > 0.0 && c.max_df_ratio <= 1.0)) fail("--max-df-ratio must be in (0, 1]");
  if (c.k_folds < 2) fail("--k-folds must be at least 2");
  if (c.resamples < 1) fail("--resamples must be at least 1");
  if (c.topics < 1) fail("--topics must be at least 1");
  if (c.alpha < 0.0) fail("--alpha must be positive (or 0 for 50/topics)");
  if (!(c.beta > 0.0)) fail("--beta must be positive");
  if (c.lda_sample_lag < 1) fail("--lda-sample-lag must be at least 1");
  if (c.lda_burn_in > c.lda_iters) fail("--lda-burn-in must not exceed --lda-iters");
  if (c.fold_in_burn_in > c.fold_in_iters) fail("--fold-in-burn-in must not exceed --fold-in-iters");
  if (!(c.lr_lambda >= 0.0)) fail("--lr-lambda must be non-negative");
  if (!(c.lr_tol > 0.0)) fail("--lr-tol must be positive");
  if (!(c.nb_smoothing > 0.0)) fail("--nb-smoothing must be positive");
  if (c.idf_scope != "fold" && c.idf_scope != "global") fail("--idf-scope must be fold or global");
  if (c.jobs < 1) fail("--jobs must be at least 1");
  for (const auto& f : c.features)
    if (!parse_representation(f)) fail("--features: unknown representation '" + f + "'");
  for (const auto& m : c.models)
    if (!parse_classifier(m)) fail("--model: unknown classifier '" + m + "'");
  if (c.separation < 0.0 || c.separation > 1.0) fail("--separation must be in [0, 1]");
  if (c.interests_per_user < 1.0) fail("--interests-per-user must be at least 1");
  if (c.n_per_class < 1) fail("--n-per-class must be at least 1");
  if (c.signature_size < 1) fail("--signature-size must be at least 1");
  if (2 * c.signature_size > c.vocab_size) fail("--signature-size: 2 * signature size exceeds --vocab-size");
  if (c.top < 1) fail("--top must be at least 1");
  if (c.estimator != "odds-ratio" && c.estimator != "likelihood-ratio")
    fail("--estimator must be odds-ratio or likelihood-ratio");
}

inline std::uint64_t require_seed(const RunConfig& c) {
  if (!c.seed) throw UsageError("--seed is required");
  return *c.seed;
}

inline LdaParams lda_params(const RunConfig& c) {
  return {c.topics, c.alpha, c.beta, {c.lda_iters, c.lda_burn_in, c.lda_sample_lag}};
}

inline ProtocolConfig protocol_config(const RunConfig& c) {
  ProtocolConfig p;
  p.seed = require_seed(c);
  p.resamples = c.resamples;
  p.folds = c.k_folds;
  p.vocab = {c.min_df, c.max_df_ratio};
  p.lda = lda_params(c);
  p.fold_in = {c.fold_in_iters, c.fold_in_burn_in};
  p.nb_smoothing = c.nb_smoothing;
  p.lr = {c.lr_lambda, c.lr_tol, c.lr_max_iter};
  p.tfidf = {c.smooth_idf, c.l2_normalize};
  p.idf_scope = c.idf_scope == "global" ? IdfScope::global : IdfScope::per_fold;
  p.jobs = c.jobs;
  p.configurations.clear();
  for (const auto& cfg : kAllConfigurations) {
    const bool f_ok = c.features.empty() ||
                      std::count(c.features.begin(), c.features.end(), to_string(cfg.features));
    const bool m_ok = c.models.empty() ||
                      std::count(c.models.begin(), c.models.end(), to_string(cfg.classifier));
    if (f_ok && m_ok) p.configurations.push_back(cfg);
  }
  return p;
}

inline PipelineOptions pipeline_options(const RunConfig& c) {
  if (c.features.size() > 1) throw UsageError("--features: train takes a single representation");
  if (c.models.size() > 1) throw UsageError("--model: train takes a single classifier");
  PipelineOptions o;
  o.features = c.features.empty() ? Representation::tfidf : *parse_representation(c.features[0]);
  o.classifier = c.models.empty() ? ClassifierKind::lr : *parse_classifier(c.models[0]);
  o.vocab = {c.min_df, c.max_df_ratio};
  o.tfidf = {c.smooth_idf, c.l2_normalize};
  o.lda = lda_params(c);
  o.fold_in = {c.fold_in_iters, c.fold_in_burn_in};
  o.nb_smoothing = c.nb_smoothing;
  o.lr = {c.lr_lambda, c.lr_tol, c.lr_max_iter};
  o.seed = require_seed(c);
  return o;
}

inline SynthParams synth_params(const RunConfig& c) {
  return {c.n_per_class, c.vocab_size, c.interests_per_user, c.separation, c.signature_size,
          require_seed(c)};
}

// "model.json" -> "model.<suffix>.json"
inline std::string sibling_path(const std::string& model_path, const std::string& suffix) {
  const std::string ext = ".json";
  std::string stem = model_path;
  if (stem.size() > ext.size() && stem.compare(stem.size() - ext.size(), ext.size(), ext) == 0)
    stem.resize(stem.size() - ext.size());
  return stem + "." + suffix + ".json";
}

}  // namespace nssi::cli
