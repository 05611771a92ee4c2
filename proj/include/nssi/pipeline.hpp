#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "features.hpp"
#include "logistic_regression.hpp"
#include "naive_bayes.hpp"
#include "topic_model.hpp"
#include "vectorize.hpp"
#include "vocabulary.hpp"

namespace nssi {

struct PipelineOptions {
  Representation features = Representation::tfidf;
  ClassifierKind classifier = ClassifierKind::lr;
  VocabularyBounds vocab;
  TfidfOptions tfidf;
  LdaParams lda;
  FoldInSchedule fold_in;
  double nb_smoothing = 1.0;
  LrOptions lr;
  std::uint64_t seed = 0;
};

struct Prediction {
  Label label = Label::negative;
  // LR: positive-class probability. NB: positive minus negative log score.
  double score = 0.0;
};

// A vocabulary, an optional topic model, and a classifier trained together on
// one corpus.
struct TrainedPipeline {
  Representation features = Representation::tfidf;
  Vocabulary vocab;
  TfidfOptions tfidf;
  std::vector<double> idf_weights;
  std::optional<TopicModel> topics;
  FoldInSchedule fold_in;
  std::variant<NBModel, LRModel> model;

  ClassifierKind classifier() const noexcept {
    return std::holds_alternative<NBModel>(model) ? ClassifierKind::nb : ClassifierKind::lr;
  }

  SparseVector featurize(const UserProfile& p) const {
    auto counts = count_vector(p, vocab);
    switch (features) {
      case Representation::count: return counts;
      case Representation::tfidf: return tfidf_from_counts(counts, idf_weights, tfidf);
      case Representation::lda:
        return to_sparse(infer_theta(*topics, counts, fold_in, fold_in_seed(*topics, p.id)));
    }
    throw Error("unknown representation");
  }

  Prediction predict(const UserProfile& p) const {
    const auto v = featurize(p);
    if (const auto* nb = std::get_if<NBModel>(&model))
      return {nssi::predict(*nb, v), nb_score_margin(*nb, v)};
    const auto& lr = std::get<LRModel>(model);
    return {nssi::predict(lr, v), lr_probability(lr, v)};
  }
};

// Vocabulary and IDF come from the corpus as given (no resampling).
inline TrainedPipeline train_pipeline(const Corpus& corpus, const PipelineOptions& opts) {
  validate(corpus);
  require_both_classes(corpus);
  TrainedPipeline tp;
  tp.features = opts.features;
  tp.tfidf = opts.tfidf;
  tp.fold_in = opts.fold_in;
  tp.vocab = build_vocabulary(corpus, opts.vocab);
  if (opts.features == Representation::tfidf) tp.idf_weights = idf(tp.vocab, opts.tfidf);

  const auto counts = count_vectors(corpus.profiles, tp.vocab);
  if (opts.features == Representation::lda) {
    std::vector<SparseVector> docs;
    for (const auto& v : counts)
      if (!v.empty()) docs.push_back(v);
    tp.topics = fit_lda(docs, opts.lda, opts.seed);
  }

  std::vector<SparseVector> x;
  std::vector<Label> y;
  x.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    y.push_back(corpus.profiles[i].label);
    if (opts.features == Representation::count)
      x.push_back(counts[i]);
    else
      x.push_back(tp.featurize(corpus.profiles[i]));
  }
  if (opts.classifier == ClassifierKind::nb)
    tp.model = train_nb(x, y, opts.nb_smoothing);
  else
    tp.model = train_lr(x, y, opts.lr);
  return tp;
}

// Classifier JSON plus the fields needed to rebuild the feature pipeline.
inline nlohmann::ordered_json model_to_json(const TrainedPipeline& tp) {
  auto j = std::visit([](const auto& m) { return to_json(m); }, tp.model);
  j["features"] = to_string(tp.features);
  j["vocab_fingerprint"] = tp.vocab.fingerprint();
  if (tp.features == Representation::tfidf) {
    j["smooth_idf"] = tp.tfidf.smooth_idf;
    j["l2_normalize"] = tp.tfidf.l2_normalize;
  }
  if (tp.features == Representation::lda) {
    j["fold_in_iters"] = tp.fold_in.iters;
    j["fold_in_burn_in"] = tp.fold_in.burn_in;
  }
  return j;
}

// Reassembles a pipeline from its three persisted parts. Throws DataError if
// the vocabulary does not match the one the classifier was trained with.
inline TrainedPipeline pipeline_from_json(const nlohmann::json& model, Vocabulary vocab,
                                          std::optional<TopicModel> topics) {
  TrainedPipeline tp;
  try {
    const auto kind = model.at("kind").get<std::string>();
    const auto features = parse_representation(model.at("features").get<std::string>());
    if (!features) throw DataError("model: unknown features value");
    tp.features = *features;
    const auto expected = model.at("vocab_fingerprint").get<std::string>();
    if (expected != vocab.fingerprint())
      throw DataError("model/vocabulary mismatch: model expects vocabulary " + expected +
                      ", vocabulary file has " + vocab.fingerprint());
    if (kind == "nb")
      tp.model = nb_model_from_json(model);
    else if (kind == "lr")
      tp.model = lr_model_from_json(model);
    else
      throw DataError("model: unknown kind '" + kind + "'");
    if (tp.features == Representation::tfidf) {
      tp.tfidf.smooth_idf = model.at("smooth_idf").get<bool>();
      tp.tfidf.l2_normalize = model.at("l2_normalize").get<bool>();
      tp.idf_weights = idf(vocab, tp.tfidf);
    }
    if (tp.features == Representation::lda) {
      tp.fold_in.iters = model.at("fold_in_iters").get<std::size_t>();
      tp.fold_in.burn_in = model.at("fold_in_burn_in").get<std::size_t>();
      if (!topics) throw DataError("model: LDA features require a topic model");
      if (topics->vocab_size != vocab.size())
        throw DataError("model: topic model vocabulary size " +
                        std::to_string(topics->vocab_size) + " != vocabulary size " +
                        std::to_string(vocab.size()));
      tp.topics = std::move(topics);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  const std::size_t expected_dim =
      tp.features == Representation::lda ? tp.topics->k : vocab.size();
  const std::size_t dim = std::visit([](const auto& m) { return m.dim(); }, tp.model);
  if (dim != expected_dim)
    throw DataError("model: classifier dimension " + std::to_string(dim) + " != feature dimension " +
                    std::to_string(expected_dim));
  tp.vocab = std::move(vocab);
  return tp;
}

}  // namespace nssi
