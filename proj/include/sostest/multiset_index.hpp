#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sostest {

/// A multiset of variable ids, naming one monomial x_I or one Hermite basis
/// element h_I.  Stored as a sorted (variable, multiplicity) list with
/// variables numbered from 1.  The empty multiset denotes the constant basis
/// element.
class MultisetIndex {
 public:
  using Entry = std::pair<int, int>;  // (variable id, multiplicity)

  MultisetIndex() = default;

  explicit MultisetIndex(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end());
    for (const auto& [var, mult] : entries) {
      if (var < 1) throw std::invalid_argument("MultisetIndex: variable ids start at 1");
      if (mult < 1) throw std::invalid_argument("MultisetIndex: multiplicities must be positive");
      if (!entries_.empty() && entries_.back().first == var) {
        entries_.back().second += mult;
      } else {
        entries_.push_back({var, mult});
      }
      degree_ += mult;
    }
  }

  /// Build from a flat list of variable ids, e.g. {1,1,2} -> (1:2, 2:1).
  static MultisetIndex of_vars(std::initializer_list<int> vars) {
    std::vector<Entry> e;
    for (int v : vars) e.push_back({v, 1});
    return MultisetIndex(std::move(e));
  }

  int total_degree() const { return degree_; }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  int multiplicity(int var) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{var, 0});
    if (it != entries_.end() && it->first == var) return it->second;
    return 0;
  }

  int max_var() const { return entries_.empty() ? 0 : entries_.back().first; }

  /// Multiset sum: the index of the product x_I * x_J.
  MultisetIndex merged(const MultisetIndex& other) const {
    std::vector<Entry> out;
    out.reserve(entries_.size() + other.entries_.size());
    auto a = entries_.begin(), b = other.entries_.begin();
    while (a != entries_.end() || b != other.entries_.end()) {
      if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
        out.push_back(*a++);
      } else if (a == entries_.end() || b->first < a->first) {
        out.push_back(*b++);
      } else {
        out.push_back({a->first, a->second + b->second});
        ++a; ++b;
      }
    }
    MultisetIndex r;
    r.entries_ = std::move(out);
    r.degree_ = degree_ + other.degree_;
    return r;
  }

  /// Per-variable |multiplicity difference| (multiset symmetric difference).
  MultisetIndex symmetric_difference(const MultisetIndex& other) const {
    std::vector<Entry> out;
    auto a = entries_.begin(), b = other.entries_.begin();
    while (a != entries_.end() || b != other.entries_.end()) {
      if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
        out.push_back(*a++);
      } else if (a == entries_.end() || b->first < a->first) {
        out.push_back(*b++);
      } else {
        int m = std::abs(a->second - b->second);
        if (m > 0) out.push_back({a->first, m});
        ++a; ++b;
      }
    }
    MultisetIndex r;
    for (const auto& [v, m] : out) r.degree_ += m;
    r.entries_ = std::move(out);
    return r;
  }

  /// Per-variable containment (I_k <= J_k for all k).
  bool contained_in(const MultisetIndex& other) const {
    for (const auto& [v, m] : entries_)
      if (other.multiplicity(v) < m) return false;
    return true;
  }

  friend bool operator==(const MultisetIndex& a, const MultisetIndex& b) {
    return a.entries_ == b.entries_;
  }

  /// Canonical order: total degree first, then lexicographic on the entry list.
  friend std::strong_ordering operator<=>(const MultisetIndex& a, const MultisetIndex& b) {
    if (auto c = a.degree_ <=> b.degree_; c != 0) return c;
    return a.entries_ <=> b.entries_;
  }

 private:
  std::vector<Entry> entries_;
  int degree_ = 0;
};

}  // namespace sostest
