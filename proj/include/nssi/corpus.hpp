#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "random.hpp"

namespace nssi {

enum class Label : std::uint8_t { negative = 0, positive = 1 };

inline constexpr std::size_t label_index(Label l) noexcept { return static_cast<std::size_t>(l); }

inline std::string_view to_string(Label l) noexcept {
  return l == Label::positive ? "positive" : "negative";
}

inline std::optional<Label> parse_label(std::string_view s) noexcept {
  if (s == "positive") return Label::positive;
  if (s == "negative") return Label::negative;
  return std::nullopt;
}

inline Label flip(Label l) noexcept {
  return l == Label::positive ? Label::negative : Label::positive;
}

// One labeled user: a multiset of normalized self-declared interests.
struct UserProfile {
  std::string id;
  Label label = Label::negative;
  std::vector<std::string> interests;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

struct Corpus {
  std::vector<UserProfile> profiles;
  std::string provenance;

  std::size_t size() const noexcept { return profiles.size(); }
  bool empty() const noexcept { return profiles.empty(); }

  std::size_t count(Label l) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        profiles.begin(), profiles.end(), [l](const UserProfile& p) { return p.label == l; }));
  }
};

// Characters that would break a line-oriented record if they survived
// normalization.
inline bool is_reserved_char(char c) noexcept { return c == '\n' || c == '\r' || c == '\x1e'; }

inline bool is_trim_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Lowercase (ASCII only; other UTF-8 bytes pass through) and trim. Returns an
// empty string for whitespace-only input.
inline std::string normalize_interest(std::string_view raw) {
  std::size_t b = 0, e = raw.size();
  while (b < e && is_trim_space(raw[b])) ++b;
  while (e > b && is_trim_space(raw[e - 1])) --e;
  std::string out(raw.substr(b, e - b));
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (is_reserved_char(c)) throw DataError("interest contains a reserved record separator");
  }
  return out;
}

// Throws DataError if ids repeat or a profile breaks the UserProfile contract.
inline void validate(const Corpus& corpus) {
  std::unordered_set<std::string_view> seen;
  for (const auto& p : corpus.profiles) {
    if (!seen.insert(p.id).second) throw DataError("duplicate id '" + p.id + "'");
    if (p.interests.empty()) throw DataError("profile '" + p.id + "' has no interests");
    for (const auto& t : p.interests) {
      if (t.empty()) throw DataError("profile '" + p.id + "' has an empty interest");
      if (std::any_of(t.begin(), t.end(), is_reserved_char))
        throw DataError("profile '" + p.id + "' has an interest with a reserved character");
    }
  }
}

inline void require_both_classes(const Corpus& corpus) {
  if (corpus.count(Label::positive) == 0 || corpus.count(Label::negative) == 0)
    throw DataError("corpus must contain at least one profile of each class");
}

// Parses one JSON Lines record. `line_no` is used for diagnostics only.
inline UserProfile parse_profile(std::string_view line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_no, "record is not a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "id" && key != "label" && key != "interests")
      throw ParseError(line_no, "unknown key '" + key + "'");
  }
  if (!j.contains("id") || !j["id"].is_string()) throw ParseError(line_no, "missing string 'id'");
  if (!j.contains("label") || !j["label"].is_string())
    throw ParseError(line_no, "missing string 'label'");
  if (!j.contains("interests") || !j["interests"].is_array())
    throw ParseError(line_no, "missing array 'interests'");

  UserProfile p;
  p.id = j["id"].get<std::string>();
  const auto label_token = j["label"].get<std::string>();
  const auto label = parse_label(label_token);
  if (!label)
    throw ParseError(line_no, "unknown label '" + label_token +
                                  "' (expected \"positive\" or \"negative\")");
  p.label = *label;
  for (const auto& item : j["interests"]) {
    if (!item.is_string()) throw ParseError(line_no, "interest is not a string");
    std::string norm;
    try {
      norm = normalize_interest(item.get_ref<const std::string&>());
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
    if (!norm.empty()) p.interests.push_back(std::move(norm));
  }
  if (p.interests.empty())
    throw ParseError(line_no, "empty interest list after normalization for id '" + p.id + "'");
  return p;
}

inline Corpus read_corpus(std::istream& in, std::string provenance = {}) {
  Corpus corpus;
  corpus.provenance = std::move(provenance);
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto p = parse_profile(line, line_no);
    if (!ids.insert(p.id).second) throw ParseError(line_no, "duplicate id '" + p.id + "'");
    corpus.profiles.push_back(std::move(p));
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  try {
    return read_corpus(in, path);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path);
  }
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& p : corpus.profiles) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["label"] = to_string(p.label);
    j["interests"] = p.interests;
    out << j.dump() << '\n';
  }
}

inline void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file '" + path + "'");
  write_corpus(out, corpus);
  if (!out) throw DataError("write failed for '" + path + "'");
}

// All positives plus a uniform sample (without replacement) of equally many
// negatives. Output order: positives in input order, then sampled negatives in
// input order.
inline Corpus balanced_resample(const Corpus& corpus, std::uint64_t seed) {
  std::vector<std::size_t> neg;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < corpus.profiles.size(); ++i) {
    if (corpus.profiles[i].label == Label::negative)
      neg.push_back(i);
    else
      ++n_pos;
  }
  if (n_pos == 0) throw DataError("balanced_resample: corpus has no positive profiles");
  if (neg.size() < n_pos)
    throw DataError("balanced_resample: fewer negatives (" + std::to_string(neg.size()) +
                    ") than positives (" + std::to_string(n_pos) + ")");

  // Partial Fisher-Yates selects the first n_pos slots.
  Rng rng(seed);
  for (std::size_t i = 0; i < n_pos; ++i) {
    const std::size_t j = i + rng.uniform_index(neg.size() - i);
    std::swap(neg[i], neg[j]);
  }
  std::vector<char> keep(corpus.profiles.size(), 0);
  for (std::size_t i = 0; i < n_pos; ++i) keep[neg[i]] = 1;

  Corpus out;
  out.provenance = corpus.provenance + " | balanced(seed=" + std::to_string(seed) + ")";
  out.profiles.reserve(2 * n_pos);
  for (const auto& p : corpus.profiles)
    if (p.label == Label::positive) out.profiles.push_back(p);
  for (std::size_t i = 0; i < corpus.profiles.size(); ++i)
    if (keep[i]) out.profiles.push_back(corpus.profiles[i]);
  return out;
}

// Copies the profiles at `indices`, preserving order.
inline std::vector<UserProfile> select(std::span<const UserProfile> profiles,
                                       std::span<const std::size_t> indices) {
  std::vector<UserProfile> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(profiles[i]);
  return out;
}

}  // namespace nssi
