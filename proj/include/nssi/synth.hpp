#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "random.hpp"

namespace nssi {

// Planted two-class generator. Each interest comes from the profile's class
// signature pool with probability `separation`, otherwise from a Zipf(1)
// background shared by both classes.
struct SynthParams {
  std::size_t n_per_class = 100;
  std::size_t vocab_size = 1264;
  double interests_per_user = 26.2;
  double separation = 0.5;
  std::size_t signature_size = 10;
  std::uint64_t seed = 0;
};

inline void validate(const SynthParams& p) {
  if (p.n_per_class < 1) throw DataError("synth: n_per_class must be at least 1");
  if (p.signature_size < 1) throw DataError("synth: signature_size must be at least 1");
  if (2 * p.signature_size > p.vocab_size)
    throw DataError("synth: 2 * signature_size must not exceed vocab_size");
  if (!(p.interests_per_user >= 1.0)) throw DataError("synth: interests_per_user must be >= 1");
  if (!(p.separation >= 0.0 && p.separation <= 1.0))
    throw DataError("synth: separation must be in [0, 1]");
}

inline std::string signature_term(Label l, std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s signature %03zu", l == Label::positive ? "pos" : "neg", i);
  return buf;
}

inline std::string background_term(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "interest %04zu", i);
  return buf;
}

inline std::string describe(const SynthParams& p) {
  std::ostringstream os;
  os << "synth(n_per_class=" << p.n_per_class << ", vocab_size=" << p.vocab_size
     << ", interests_per_user=" << p.interests_per_user << ", separation=" << p.separation
     << ", signature_size=" << p.signature_size << ", seed=" << p.seed << ")";
  return os.str();
}

// The vocabulary holds vocab_size - 2 * signature_size background terms plus
// both signature pools. The background ranks background terms first and
// signature terms last, so signatures leak into both classes only through the
// Zipf tail.
inline Corpus generate(const SynthParams& params) {
  validate(params);
  const std::size_t n_sig = params.signature_size;
  const std::size_t n_background = params.vocab_size - 2 * n_sig;

  std::vector<std::string> ranked;
  ranked.reserve(params.vocab_size);
  for (std::size_t i = 0; i < n_background; ++i) ranked.push_back(background_term(i));
  for (std::size_t i = 0; i < n_sig; ++i) {
    ranked.push_back(signature_term(Label::positive, i));
    ranked.push_back(signature_term(Label::negative, i));
  }
  std::vector<double> zipf_cdf(ranked.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    acc += 1.0 / static_cast<double>(r + 1);
    zipf_cdf[r] = acc;
  }

  Rng rng(params.seed);
  Corpus corpus;
  corpus.provenance = describe(params);
  corpus.profiles.reserve(2 * params.n_per_class);
  for (const auto label : {Label::positive, Label::negative}) {
    for (std::size_t u = 0; u < params.n_per_class; ++u) {
      UserProfile p;
      char id[32];
      std::snprintf(id, sizeof id, "%s-%06zu", label == Label::positive ? "pos" : "neg", u);
      p.id = id;
      p.label = label;
      const std::size_t len = std::max<std::uint64_t>(1, rng.poisson(params.interests_per_user));
      p.interests.reserve(len);
      for (std::size_t t = 0; t < len; ++t) {
        if (rng.uniform01() < params.separation)
          p.interests.push_back(signature_term(label, rng.uniform_index(n_sig)));
        else
          p.interests.push_back(ranked[rng.categorical(zipf_cdf)]);
      }
      corpus.profiles.push_back(std::move(p));
    }
  }
  return corpus;
}

}  // namespace nssi
