#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace nssi {

// Sorted (index, weight) pairs over a fixed dimension. Indices are strictly
// increasing and every stored weight is positive and finite.
class SparseVector {
 public:
  struct Entry {
    std::size_t index;
    double weight;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  SparseVector() = default;
  explicit SparseVector(std::size_t dim) : dim_(dim) {}

  static SparseVector from_entries(std::size_t dim, std::vector<Entry> entries) {
    SparseVector v(dim);
    v.entries_.reserve(entries.size());
    for (const auto& e : entries) v.push_back(e.index, e.weight);
    return v;
  }

  // Appends an entry; zero weights are silently dropped.
  void push_back(std::size_t index, double weight) {
    if (index >= dim_)
      throw DataError("sparse vector: index " + std::to_string(index) + " out of range " +
                      std::to_string(dim_));
    if (!entries_.empty() && index <= entries_.back().index)
      throw DataError("sparse vector: indices must be strictly increasing");
    if (!(weight >= 0.0) || !std::isfinite(weight))
      throw DataError("sparse vector: weights must be finite and non-negative");
    if (weight == 0.0) return;
    entries_.push_back({index, weight});
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const Entry> entries() const noexcept { return entries_; }

  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  double weight_at(std::size_t index) const noexcept {
    for (const auto& e : entries_)
      if (e.index == index) return e.weight;
    return 0.0;
  }

  double sum() const noexcept {
    double s = 0.0;
    for (const auto& e : entries_) s += e.weight;
    return s;
  }

  double dot(std::span<const double> dense) const {
    if (dense.size() != dim_) throw DataError("sparse vector: dimension mismatch in dot");
    double s = 0.0;
    for (const auto& e : entries_) s += e.weight * dense[e.index];
    return s;
  }

  SparseVector scaled(double factor) const {
    if (!(factor > 0.0)) throw DataError("sparse vector: scale factor must be positive");
    SparseVector v(dim_);
    v.entries_ = entries_;
    for (auto& e : v.entries_) e.weight *= factor;
    return v;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
};

inline void require_dim(const SparseVector& v, std::size_t dim, const char* where) {
  if (v.dim() != dim)
    throw DataError(std::string(where) + ": dimension mismatch (vector " + std::to_string(v.dim()) +
                    ", model " + std::to_string(dim) + ")");
}

}  // namespace nssi
