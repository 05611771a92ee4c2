#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "random.hpp"

namespace nssi {

// assignments[i] is the test fold of profile i.
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(i);
    return out;
  }
};

// Each class is shuffled and dealt round-robin; the second class continues
// where the first stopped, so overall fold sizes also differ by at most one.
inline FoldPlan stratified_folds(std::span<const UserProfile> profiles, std::size_t k,
                                 std::uint64_t seed) {
  if (k < 2) throw DataError("stratified_folds: k must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < profiles.size(); ++i)
    by_class[label_index(profiles[i].label)].push_back(i);
  for (const auto l : {Label::positive, Label::negative}) {
    if (by_class[label_index(l)].size() < k)
      throw DataError("stratified_folds: class '" + std::string(to_string(l)) + "' has " +
                      std::to_string(by_class[label_index(l)].size()) + " members, fewer than k=" +
                      std::to_string(k));
  }

  Rng rng(seed);
  FoldPlan plan{k, std::vector<std::size_t>(profiles.size(), 0)};
  std::size_t next = 0;
  for (const auto l : {Label::positive, Label::negative}) {
    auto& members = by_class[label_index(l)];
    rng.shuffle(std::span<std::size_t>(members));
    for (auto i : members) {
      plan.assignments[i] = next;
      next = (next + 1) % k;
    }
  }
  return plan;
}

inline FoldPlan stratified_folds(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  return stratified_folds(std::span<const UserProfile>(corpus.profiles), k, seed);
}

}  // namespace nssi
