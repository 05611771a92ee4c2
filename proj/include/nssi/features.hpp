#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "error.hpp"

namespace nssi {

enum class Representation { count, tfidf, lda };
enum class ClassifierKind { nb, lr };

inline std::string_view to_string(Representation r) noexcept {
  switch (r) {
    case Representation::count: return "count";
    case Representation::tfidf: return "tfidf";
    case Representation::lda: return "lda";
  }
  return "?";
}

inline std::string_view to_string(ClassifierKind c) noexcept {
  return c == ClassifierKind::nb ? "nb" : "lr";
}

inline std::optional<Representation> parse_representation(std::string_view s) noexcept {
  if (s == "count") return Representation::count;
  if (s == "tfidf") return Representation::tfidf;
  if (s == "lda") return Representation::lda;
  return std::nullopt;
}

inline std::optional<ClassifierKind> parse_classifier(std::string_view s) noexcept {
  if (s == "nb") return ClassifierKind::nb;
  if (s == "lr") return ClassifierKind::lr;
  return std::nullopt;
}

// One (representation, classifier) pair.
struct Configuration {
  Representation features = Representation::count;
  ClassifierKind classifier = ClassifierKind::nb;

  std::string key() const {
    return std::string(to_string(features)) + "_" + std::string(to_string(classifier));
  }

  std::string display_name() const {
    std::string name;
    switch (features) {
      case Representation::count: name = "Simple-Count"; break;
      case Representation::tfidf: name = "TF-IDF"; break;
      case Representation::lda: name = "LDA-Topic-Distribution"; break;
    }
    return name + (classifier == ClassifierKind::nb ? " (NB)" : " (LR)");
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// The six configurations in report order: all NB rows, then all LR rows.
inline constexpr std::array<Configuration, 6> kAllConfigurations{{
    {Representation::count, ClassifierKind::nb},
    {Representation::tfidf, ClassifierKind::nb},
    {Representation::lda, ClassifierKind::nb},
    {Representation::count, ClassifierKind::lr},
    {Representation::tfidf, ClassifierKind::lr},
    {Representation::lda, ClassifierKind::lr},
}};

}  // namespace nssi
