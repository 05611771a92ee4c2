// nssi: synth / evaluate / train / predict / rank.
//
// Exit codes: 0 success, 1 data or runtime error, 2 usage error.
// Precedence: built-in defaults < --config FILE < command-line flags.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nssi/nssi.hpp"
#include "run_config.hpp"

namespace {

using nssi::cli::RunConfig;
using nssi::cli::UsageError;

void log(const std::string& cmd, const std::string& msg) {
  std::cerr << "nssi " << cmd << ": " << msg << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw nssi::DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw nssi::DataError("write failed: '" + path + "'");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nssi::DataError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw nssi::DataError(path + ": parse error at byte " + std::to_string(e.byte));
  }
}

std::string require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
  return value;
}

// --config must be known before the parser is built so its values become the
// flag defaults.
std::optional<std::string> scan_config_flag(int argc, char** argv) {
  std::optional<std::string> path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config") {
      if (i + 1 >= argc) throw UsageError("--config requires a file argument");
      path = argv[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(std::strlen("--config="));
    }
  }
  return path;
}

// Integer lower bound with a readable message ("--top: must be at least 1").
CLI::Validator at_least(long long lo) {
  return CLI::Validator(
      [lo](std::string& v) -> std::string {
        try {
          std::size_t used = 0;
          const long long x = std::stoll(v, &used);
          if (used == v.size() && x >= lo) return {};
        } catch (const std::exception&) {
        }
        return "must be an integer of at least " + std::to_string(lo) + " (got " + v + ")";
      },
      ">=" + std::to_string(lo));
}

struct Flags {
  RunConfig& cfg;
  std::uint64_t seed = 0;
  std::vector<CLI::Option*> seed_opts;

  void config(CLI::App* sub) {
    sub->add_option("--config", "JSON file of defaults; flags take precedence");
  }
  void seed_flag(CLI::App* sub) {
    seed_opts.push_back(sub->add_option("--seed", seed, "master random seed (required)"));
  }
  void corpus(CLI::App* sub) {
    sub->add_option("--corpus", cfg.corpus, "input corpus (JSONL)");
  }
  void vocab(CLI::App* sub) {
    sub->add_option("--min-df", cfg.min_df, "keep terms with df > min-df")->capture_default_str();
    sub->add_option("--max-df-ratio", cfg.max_df_ratio, "keep terms with df < ratio * n_docs")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  }
  void classifiers(CLI::App* sub) {
    sub->add_option("--nb-smoothing", cfg.nb_smoothing, "NB additive smoothing")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--lr-lambda", cfg.lr_lambda, "LR L2 strength")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--lr-tol", cfg.lr_tol, "LR convergence tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--lr-max-iter", cfg.lr_max_iter, "LR iteration cap")->capture_default_str();
  }
  void features(CLI::App* sub) {
    sub->add_option("--features", cfg.features, "count, tfidf, lda (comma separated)")
        ->delimiter(',')
        ->check(CLI::IsMember({"count", "tfidf", "lda"}));
    sub->add_option("--model", cfg.models, "nb, lr (comma separated)")
        ->delimiter(',')
        ->check(CLI::IsMember({"nb", "lr"}));
    sub->add_flag("--smooth-idf", cfg.smooth_idf, "idf = ln((1+N)/(1+df)) + 1");
    sub->add_flag("--l2-normalize", cfg.l2_normalize, "unit-length TF-IDF vectors");
  }
  void lda(CLI::App* sub) {
    sub->add_option("--topics", cfg.topics, "LDA topic count")
        ->check(at_least(1))
        ->capture_default_str();
    sub->add_option("--alpha", cfg.alpha, "document-topic prior (0: 50/topics)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--beta", cfg.beta, "topic-word prior")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--lda-iters", cfg.lda_iters, "Gibbs sweeps")->capture_default_str();
    sub->add_option("--lda-burn-in", cfg.lda_burn_in, "sweeps before phi sampling")
        ->capture_default_str();
    sub->add_option("--lda-sample-lag", cfg.lda_sample_lag, "sweeps between phi samples")
        ->check(at_least(1))
        ->capture_default_str();
    sub->add_option("--fold-in-iters", cfg.fold_in_iters, "held-out inference sweeps")
        ->capture_default_str();
    sub->add_option("--fold-in-burn-in", cfg.fold_in_burn_in, "held-out burn-in sweeps")
        ->capture_default_str();
  }

  void resolve_seed() {
    for (auto* o : seed_opts)
      if (o->count() > 0) cfg.seed = seed;
  }
};

// ---- commands --------------------------------------------------------------

int cmd_synth(const RunConfig& cfg) {
  const auto params = nssi::cli::synth_params(cfg);
  const auto out = require_path(cfg.out, "--out");
  const auto corpus = nssi::generate(params);
  nssi::save_corpus(out, corpus);
  log("synth", corpus.provenance);
  log("synth", "wrote " + std::to_string(corpus.size()) + " profiles to " + out);
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  auto pc = nssi::cli::protocol_config(cfg);
  if (pc.configurations.empty()) throw UsageError("--features/--model select no configuration");
  const auto corpus = nssi::load_corpus(require_path(cfg.corpus, "--corpus"));
  log("evaluate", std::to_string(corpus.size()) + " profiles, " +
                      std::to_string(pc.configurations.size()) + " configurations, " +
                      std::to_string(pc.resamples * pc.folds) + " runs each, jobs=" +
                      std::to_string(pc.jobs));
  const auto report = nssi::run_protocol(corpus, pc);
  for (const auto& f : report.flags) log("evaluate", "warning: " + f.configuration + " resample " + std::to_string(f.resample) + " fold " + std::to_string(f.fold) + ": " + f.flag);

  const auto table = nssi::render_table(report);
  if (cfg.out_table.empty())
    std::cout << table;
  else
    write_text(cfg.out_table, table);
  if (!cfg.out_json.empty()) {
    write_text(cfg.out_json, nssi::to_json(report).dump(2) + "\n");
    log("evaluate", "wrote " + cfg.out_json);
  }
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const auto opts = nssi::cli::pipeline_options(cfg);
  const auto out = require_path(cfg.out, "--out");
  const auto corpus = nssi::load_corpus(require_path(cfg.corpus, "--corpus"));
  const auto tp = nssi::train_pipeline(corpus, opts);

  const auto vocab_path =
      cfg.vocab_path.empty() ? nssi::cli::sibling_path(out, "vocab") : cfg.vocab_path;
  write_text(out, nssi::model_to_json(tp).dump(2) + "\n");
  write_text(vocab_path, nssi::to_json(tp.vocab).dump(2) + "\n");
  log("train", "vocabulary " + tp.vocab.fingerprint() + " (" + std::to_string(tp.vocab.size()) +
                   " terms) -> " + vocab_path);
  if (tp.topics) {
    const auto topics_path =
        cfg.topics_path.empty() ? nssi::cli::sibling_path(out, "topics") : cfg.topics_path;
    write_text(topics_path, nssi::to_json(*tp.topics).dump(2) + "\n");
    log("train", "topic model -> " + topics_path);
  }
  log("train", std::string(nssi::to_string(tp.features)) + "/" +
                   std::string(nssi::to_string(tp.classifier())) + " model -> " + out);
  return 0;
}

int cmd_predict(const RunConfig& cfg) {
  const auto model_path = require_path(cfg.model_path, "--model-file");
  const auto model = read_json(model_path);
  const auto vocab_path =
      cfg.vocab_path.empty() ? nssi::cli::sibling_path(model_path, "vocab") : cfg.vocab_path;
  auto vocab = nssi::vocabulary_from_json(read_json(vocab_path));

  std::optional<nssi::TopicModel> topics;
  if (model.is_object() && model.value("features", "") == "lda") {
    const auto topics_path =
        cfg.topics_path.empty() ? nssi::cli::sibling_path(model_path, "topics") : cfg.topics_path;
    topics = nssi::topic_model_from_json(read_json(topics_path));
  }
  const auto tp = nssi::pipeline_from_json(model, std::move(vocab), std::move(topics));
  const auto corpus = nssi::load_corpus(require_path(cfg.corpus, "--corpus"));

  std::ostringstream os;
  for (const auto& p : corpus.profiles) {
    const auto pred = tp.predict(p);
    nlohmann::ordered_json line;
    line["id"] = p.id;
    line["label"] = std::string(nssi::to_string(pred.label));
    line["score"] = pred.score;
    os << line.dump() << '\n';
  }
  if (cfg.out.empty())
    std::cout << os.str();
  else
    write_text(cfg.out, os.str());
  log("predict", "scored " + std::to_string(corpus.size()) + " profiles");
  return 0;
}

int cmd_rank(const RunConfig& cfg) {
  const auto seed = nssi::cli::require_seed(cfg);
  auto corpus = nssi::load_corpus(require_path(cfg.corpus, "--corpus"));
  nssi::require_both_classes(corpus);
  if (corpus.count(nssi::Label::positive) != corpus.count(nssi::Label::negative)) {
    corpus = nssi::balanced_resample(corpus, nssi::derive_seed(seed, nssi::kResampleStream, 0));
    log("rank", "balanced to " + std::to_string(corpus.size()) + " profiles");
  }
  const auto vocab = nssi::build_vocabulary(corpus, {cfg.min_df, cfg.max_df_ratio});

  std::vector<nssi::RankedFeature> ranked;
  if (cfg.estimator == "odds-ratio") {
    ranked = nssi::odds_ratios(vocab);
  } else {
    const auto x = nssi::count_vectors(corpus.profiles, vocab);
    const auto y = nssi::detail::labels_of(corpus.profiles);
    ranked = nssi::likelihood_ratios(vocab, nssi::train_nb(x, y, cfg.nb_smoothing));
  }
  const auto tb = nssi::top_features(ranked, cfg.top);

  const auto text = nssi::render_top_bottom(tb);
  if (cfg.out_table.empty())
    std::cout << text;
  else
    write_text(cfg.out_table, text);
  if (!cfg.out_json.empty()) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["estimator"] = cfg.estimator;
    j["vocab_fingerprint"] = vocab.fingerprint();
    j["top"] = nssi::to_json(tb.top);
    j["bottom"] = nssi::to_json(tb.bottom);
    write_text(cfg.out_json, j.dump(2) + "\n");
  }
  log("rank", std::to_string(vocab.size()) + " terms ranked by " + cfg.estimator);
  return 0;
}

int run(int argc, char** argv) {
  RunConfig cfg;
  if (auto path = scan_config_flag(argc, argv)) cfg = nssi::cli::load_run_config(*path);

  CLI::App app{"Detect NSSI-interested users from interest profiles."};
  app.require_subcommand(1);
  Flags flags{cfg, 0, {}};

  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
  flags.config(synth);
  flags.seed_flag(synth);
  synth->add_option("--n-per-class", cfg.n_per_class, "profiles per class")
      ->check(at_least(1))
      ->capture_default_str();
  synth->add_option("--vocab-size", cfg.vocab_size, "distinct interests")->capture_default_str();
  synth->add_option("--interests-per-user", cfg.interests_per_user, "mean profile length")
      ->check(CLI::Range(1.0, 1e9))
      ->capture_default_str();
  synth->add_option("--separation", cfg.separation, "class signal strength")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth->add_option("--signature-size", cfg.signature_size, "signature terms per class")
      ->check(at_least(1))
      ->capture_default_str();
  synth->add_option("--out", cfg.out, "output corpus (JSONL)");

  auto* evaluate = app.add_subcommand("evaluate", "repeated balanced cross-validation");
  flags.config(evaluate);
  flags.seed_flag(evaluate);
  flags.corpus(evaluate);
  flags.vocab(evaluate);
  flags.features(evaluate);
  flags.classifiers(evaluate);
  flags.lda(evaluate);
  evaluate->add_option("--resamples", cfg.resamples, "balanced resamples")
      ->check(at_least(1))
      ->capture_default_str();
  evaluate->add_option("--k-folds", cfg.k_folds, "folds per resample")
      ->check(at_least(2))
      ->capture_default_str();
  evaluate->add_option("--idf-scope", cfg.idf_scope, "fold or global")
      ->check(CLI::IsMember({"fold", "global"}))
      ->capture_default_str();
  evaluate->add_option("--jobs", cfg.jobs, "concurrent (resample, fold) units")
      ->check(at_least(1))
      ->capture_default_str();
  evaluate->add_option("--out-json", cfg.out_json, "JSON report path");
  evaluate->add_option("--out-table", cfg.out_table, "table path (default: stdout)");

  auto* train = app.add_subcommand("train", "fit one pipeline on a whole corpus");
  flags.config(train);
  flags.seed_flag(train);
  flags.corpus(train);
  flags.vocab(train);
  flags.features(train);
  flags.classifiers(train);
  flags.lda(train);
  train->add_option("--out", cfg.out, "model JSON path");
  train->add_option("--vocab-out", cfg.vocab_path, "vocabulary path (default: <out>.vocab.json)");
  train->add_option("--topics-out", cfg.topics_path,
                    "topic model path (default: <out>.topics.json)");

  auto* predict = app.add_subcommand("predict", "score a corpus with a trained model");
  flags.config(predict);
  flags.corpus(predict);
  predict->add_option("--model-file", cfg.model_path, "model JSON written by train");
  predict->add_option("--vocab", cfg.vocab_path, "vocabulary (default: <model>.vocab.json)");
  predict->add_option("--topics", cfg.topics_path, "topic model (default: <model>.topics.json)");
  predict->add_option("--out", cfg.out, "predictions JSONL (default: stdout)");

  auto* rank = app.add_subcommand("rank", "rank interests by class association");
  flags.config(rank);
  flags.seed_flag(rank);
  flags.corpus(rank);
  flags.vocab(rank);
  rank->add_option("--top", cfg.top, "entries per list")
      ->check(at_least(1))
      ->capture_default_str();
  rank->add_option("--estimator", cfg.estimator, "odds-ratio or likelihood-ratio")
      ->check(CLI::IsMember({"odds-ratio", "likelihood-ratio"}))
      ->capture_default_str();
  rank->add_option("--nb-smoothing", cfg.nb_smoothing, "NB smoothing (likelihood-ratio)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rank->add_option("--out-json", cfg.out_json, "JSON path");
  rank->add_option("--out-table", cfg.out_table, "text path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  flags.resolve_seed();
  nssi::cli::validate(cfg);

  if (*synth) return cmd_synth(cfg);
  if (*evaluate) return cmd_evaluate(cfg);
  if (*train) return cmd_train(cfg);
  if (*predict) return cmd_predict(cfg);
  return cmd_rank(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "nssi: usage error: " << e.what() << "\nRun with --help for more information.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "nssi: error: " << e.what() << '\n';
    return 1;
  }
}
