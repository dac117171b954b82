#pragma once

#include <climits>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "latmap/errors.hpp"
#include "latmap/monomial.hpp"
#include "latmap/rational.hpp"

namespace latmap {

class Polynomial;
Polynomial multiply(const Polynomial& a, const Polynomial& b, int max_degree);

// Reusable power table for repeated substitution with one fixed assignment
// and one fixed truncation degree. Truncated powers compose because every
// degree is non-negative, so dropping a high-degree term can never influence
// a low-degree term later.
struct SubstitutionCache {
  int max_degree = -1;
  std::map<int, std::vector<Polynomial>> powers;
};

// Sparse exact polynomial: monomial -> nonzero rational coefficient, keyed by
// the canonical monomial order. Equality of values is equality of maps, so
// the zero-coefficient-free invariant is maintained by every mutator.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, Rational>;

  Polynomial() = default;

  static Polynomial constant(const Rational& c) {
    Polynomial p;
    if (c != 0) p.terms_[Monomial()] = c;
    return p;
  }

  static Polynomial variable(int var) {
    Polynomial p;
    p.terms_[Monomial::variable(var)] = 1;
    return p;
  }

  static Polynomial from_terms(
      const std::vector<std::pair<Monomial, Rational>>& terms) {
    Polynomial p;
    for (const auto& [m, c] : terms) p.add_term(m, c);
    return p;
  }

  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Degree of the zero polynomial is -1 by convention.
  int degree() const {
    return terms_.empty() ? -1 : terms_.rbegin()->first.degree();
  }
  int min_degree() const {
    return terms_.empty() ? INT_MAX : terms_.begin()->first.degree();
  }
  bool is_homogeneous() const {
    return terms_.empty() || degree() == min_degree();
  }

  Rational coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  std::set<int> variables() const {
    std::set<int> vars;
    for (const auto& [m, c] : terms_)
      for (const auto& [v, e] : m.entries()) vars.insert(v);
    return vars;
  }

  void add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& other) {
    for (const auto& [m, c] : other.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& other) {
    for (const auto& [m, c] : other.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial& operator*=(const Rational& c) {
    if (c == 0) {
      terms_.clear();
    } else {
      for (auto& [m, v] : terms_) v *= c;
    }
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) {
    a += b;
    return a;
  }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) {
    a -= b;
    return a;
  }
  friend Polynomial operator-(Polynomial a) {
    for (auto& [m, v] : a.terms_) v = -v;
    return a;
  }
  friend Polynomial operator*(Polynomial a, const Rational& c) {
    a *= c;
    return a;
  }
  friend Polynomial operator*(const Rational& c, Polynomial a) {
    a *= c;
    return a;
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    return multiply(a, b, -1);
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.terms_ == b.terms_;
  }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) {
    return !(a == b);
  }

  Polynomial derivative(int var) const {
    Polynomial d;
    for (const auto& [m, c] : terms_) {
      int e = m.exponent_of(var);
      if (e > 0) d.add_term(m.without_one(var), c * e);
    }
    return d;
  }

  // Terms of total degree exactly d.
  Polynomial homogeneous_part(int d) const {
    Polynomial p;
    for (const auto& [m, c] : terms_)
      if (m.degree() == d) p.terms_[m] = c;
    return p;
  }

  // Terms of total degree at most max_degree.
  Polynomial truncated(int max_degree) const {
    Polynomial p;
    for (const auto& [m, c] : terms_) {
      if (m.degree() > max_degree) break;
      p.terms_[m] = c;
    }
    return p;
  }

  // Substitutes images[v] for every variable v, truncating all intermediate
  // products at max_degree. Every variable in the support needs an image. A
  // cache may be shared across calls that use the same images and the same
  // max_degree, which is the hot pattern in the consistency residual.
  Polynomial substituted(const std::map<int, Polynomial>& images,
                         int max_degree,
                         SubstitutionCache* cache = nullptr) const {
    for (int v : variables())
      if (!images.count(v))
        throw MissingAssignment("no image for variable v" + std::to_string(v));
    SubstitutionCache local;
    if (cache == nullptr) cache = &local;
    if (cache->max_degree == -1) cache->max_degree = max_degree;
    if (cache->max_degree != max_degree)
      throw std::logic_error("substitution cache reused at another degree");

    Polynomial result;
    for (const auto& [m, c] : terms_) {
      long lower_bound = 0;
      bool vanishes = false;
      for (const auto& [v, e] : m.entries()) {
        const Polynomial& img = images.at(v);
        if (img.is_zero()) {
          vanishes = true;
          break;
        }
        lower_bound += static_cast<long>(e) * img.min_degree();
      }
      if (vanishes || lower_bound > max_degree) continue;
      Polynomial prod = Polynomial::constant(c);
      for (const auto& [v, e] : m.entries())
        prod = multiply(prod, power_of(images.at(v), v, e, max_degree, *cache),
                        max_degree);
      result += prod;
    }
    return result;
  }

  // Injective variable renaming; ids absent from the map stay put.
  Polynomial renamed(const std::map<int, int>& mapping) const {
    Polynomial p;
    for (const auto& [m, c] : terms_) {
      std::vector<Monomial::Entry> entries;
      std::set<int> seen;
      for (const auto& [v, e] : m.entries()) {
        auto it = mapping.find(v);
        int target = it == mapping.end() ? v : it->second;
        if (!seen.insert(target).second)
          throw std::invalid_argument("renaming collides on v" +
                                      std::to_string(target));
        entries.push_back({target, e});
      }
      p.add_term(Monomial::from_entries(std::move(entries)), c);
    }
    return p;
  }

  // Integer-primitive representative of the line through this polynomial:
  // coefficients are scaled to coprime integers with the lowest-order term
  // positive. Used where generated equations are compared up to scale.
  Polynomial normalized_primitive() const {
    if (terms_.empty()) return *this;
    BigInt denom_lcm = 1, numer_gcd = 0;
    for (const auto& [m, c] : terms_) {
      denom_lcm = lcm(denom_lcm, denominator(c));
      numer_gcd = gcd(numer_gcd, numerator(c));
    }
    Rational scale(denom_lcm, numer_gcd);
    if (terms_.begin()->second < 0) scale = -scale;
    Polynomial p = *this;
    p *= scale;
    return p;
  }

  std::string to_string(const std::function<std::string(int)>& namer =
                            Monomial::default_namer) const {
    if (terms_.empty()) return "0";
    std::string s;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [m, c] = *it;
      Rational a = c;
      if (s.empty()) {
        if (a < 0) {
          s += "-";
          a = -a;
        }
      } else {
        s += a < 0 ? " - " : " + ";
        if (a < 0) a = -a;
      }
      if (m.is_one()) {
        s += latmap::to_string(a);
      } else {
        if (a != 1) s += latmap::to_string(a) + "*";
        s += m.to_string(namer);
      }
    }
    return s;
  }

 private:
  static const Polynomial& power_of(const Polynomial& base, int var, int exp,
                                    int max_degree, SubstitutionCache& cache) {
    auto& pows = cache.powers[var];
    if (pows.empty()) pows.push_back(Polynomial::constant(1));
    while (static_cast<int>(pows.size()) <= exp)
      pows.push_back(multiply(pows.back(), base, max_degree));
    return pows[exp];
  }

  TermMap terms_;
};

// Product of a and b; terms above max_degree are dropped as they arise.
// max_degree < 0 means no truncation.
inline Polynomial multiply(const Polynomial& a, const Polynomial& b,
                           int max_degree) {
  Polynomial r;
  for (const auto& [ma, ca] : a.terms()) {
    int da = ma.degree();
    if (max_degree >= 0 && da > max_degree) break;
    for (const auto& [mb, cb] : b.terms()) {
      if (max_degree >= 0 && da + mb.degree() > max_degree) break;
      r.add_term(ma.times(mb), ca * cb);
    }
  }
  return r;
}

}  // namespace latmap
