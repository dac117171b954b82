#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace latmap {

// Power product over opaque integer variable ids. Stored as (var, exponent)
// pairs sorted by var with all exponents > 0; the empty product is 1.
//
// The canonical total order is graded: lower total degree first, ties broken
// by lexicographic comparison of the sorted (var, exponent) sequences. Any
// fixed total order would do; this one is cheap and stable, and every ordered
// listing in the library (serialization, matrix columns, reports) uses it.
class Monomial {
 public:
  using Entry = std::pair<int, int>;

  Monomial() = default;

  static Monomial variable(int var, int exp = 1) {
    Monomial m;
    if (exp > 0) m.entries_.push_back({var, exp});
    return m;
  }

  // Normalizes: sorts by var, merges duplicates, drops zero exponents.
  static Monomial from_entries(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end());
    Monomial m;
    for (const auto& [var, exp] : entries) {
      if (exp == 0) continue;
      if (!m.entries_.empty() && m.entries_.back().first == var)
        m.entries_.back().second += exp;
      else
        m.entries_.push_back({var, exp});
    }
    m.entries_.erase(
        std::remove_if(m.entries_.begin(), m.entries_.end(),
                       [](const Entry& e) { return e.second == 0; }),
        m.entries_.end());
    return m;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool is_one() const { return entries_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [var, exp] : entries_) d += exp;
    return d;
  }

  int exponent_of(int var) const {
    for (const auto& [v, e] : entries_)
      if (v == var) return e;
    return 0;
  }

  Monomial times(const Monomial& other) const {
    Monomial r;
    auto a = entries_.begin(), b = other.entries_.begin();
    while (a != entries_.end() && b != other.entries_.end()) {
      if (a->first < b->first)
        r.entries_.push_back(*a++);
      else if (b->first < a->first)
        r.entries_.push_back(*b++);
      else {
        r.entries_.push_back({a->first, a->second + b->second});
        ++a, ++b;
      }
    }
    r.entries_.insert(r.entries_.end(), a, entries_.end());
    r.entries_.insert(r.entries_.end(), b, other.entries_.end());
    return r;
  }

  // Divides by one power of var; exponent must be positive.
  Monomial without_one(int var) const {
    Monomial r;
    for (const auto& [v, e] : entries_) {
      if (v == var) {
        if (e > 1) r.entries_.push_back({v, e - 1});
      } else {
        r.entries_.push_back({v, e});
      }
    }
    return r;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.entries_ == b.entries_;
  }
  friend bool operator!=(const Monomial& a, const Monomial& b) {
    return !(a == b);
  }
  friend bool operator<(const Monomial& a, const Monomial& b) {
    int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    return a.entries_ < b.entries_;
  }

  std::string to_string(
      const std::function<std::string(int)>& namer = default_namer) const {
    if (entries_.empty()) return "1";
    std::string s;
    for (const auto& [var, exp] : entries_) {
      if (!s.empty()) s += "*";
      s += namer(var);
      if (exp > 1) s += "^" + std::to_string(exp);
    }
    return s;
  }

  static std::string default_namer(int var) {
    return "v" + std::to_string(var);
  }

 private:
  std::vector<Entry> entries_;
};

}  // namespace latmap
