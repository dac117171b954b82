#pragma once

// Shared test utilities: deterministic random generation and independent
// oracles. Everything is seeded explicitly; no call touches global state.
// Integer draws use modulo reduction on a 64-bit engine, which is plenty
// uniform for test sampling and identical across platforms.

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "latmap/latmap.hpp"

namespace testutil {

using latmap::BigInt;
using latmap::ComponentKey;
using latmap::FaceVariable;
using latmap::MapFamily;
using latmap::Monomial;
using latmap::PointState;
using latmap::Polynomial;
using latmap::Rational;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [lo, hi], inclusive
  int uniform(int lo, int hi) {
    return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  bool chance(int percent) { return uniform(1, 100) <= percent; }

  // numerator in [-9, 9], denominator in [1, 9]
  Rational rational() { return Rational(uniform(-9, 9), uniform(1, 9)); }

  Rational nonzero_rational() {
    Rational r = rational();
    while (r == 0) r = rational();
    return r;
  }

  double real(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(eng_() % 1000001) / 1e6);
  }

 private:
  std::mt19937_64 eng_;
};

// Random polynomial over the given variables, degrees within [min_degree,
// max_degree], at most max_terms monomials.
inline Polynomial random_polynomial(Rng& rng, const std::vector<int>& vars,
                                    int min_degree, int max_degree,
                                    int max_terms) {
  Polynomial p;
  int terms = rng.uniform(1, max_terms);
  for (int t = 0; t < terms; ++t) {
    int d = rng.uniform(min_degree, max_degree);
    std::vector<Monomial::Entry> entries;
    int left = d;
    for (size_t v = 0; v + 1 < vars.size(); ++v) {
      int e = rng.uniform(0, left);
      entries.push_back({vars[v], e});
      left -= e;
    }
    if (!vars.empty()) entries.push_back({vars.back(), left});
    p.add_term(Monomial::from_entries(entries), rng.rational());
  }
  return p;
}

// Random homogeneous polynomial of exact degree d in three variables.
inline Polynomial random_homogeneous3(Rng& rng, int v0, int v1, int v2,
                                      int d) {
  Polynomial p;
  int terms = rng.uniform(1, 4);
  for (int t = 0; t < terms; ++t) {
    int a = rng.uniform(0, d);
    int b = rng.uniform(0, d - a);
    int c = d - a - b;
    p.add_term(Monomial::from_entries({{v0, a}, {v1, b}, {v2, c}}),
               rng.nonzero_rational());
  }
  return p;
}

// Family of the given order with the Darboux quadratic head x_ik x_jk and
// random in-scope homogeneous tails at degrees 3..order.
inline MapFamily random_darboux_headed_family(Rng& rng, int order) {
  MapFamily fam(4, order);
  for (const ComponentKey& key : latmap::component_keys(4)) {
    auto s = fam.scope_ids(key);
    Polynomial head;
    head.add_term(Monomial::from_entries({{s[1], 1}, {s[2], 1}}), 1);
    fam.set_term(key, 2, head);
    for (int d = 3; d <= order; ++d)
      if (rng.chance(60))
        fam.set_term(key, d, random_homogeneous3(rng, s[0], s[1], s[2], d));
  }
  return fam;
}

// Exact evaluation of a polynomial at a rational point; the independent
// oracle for ring operations (evaluation is a ring homomorphism).
inline Rational eval_poly(const Polynomial& p,
                          const std::map<int, Rational>& point) {
  Rational sum = 0;
  for (const auto& [mono, coeff] : p.terms()) {
    Rational term = coeff;
    for (const auto& [var, exp] : mono.entries()) {
      const Rational& x = point.at(var);
      for (int e = 0; e < exp; ++e) term *= x;
    }
    sum += term;
  }
  return sum;
}

inline std::map<int, Rational> random_point(Rng& rng,
                                            const std::vector<int>& vars) {
  std::map<int, Rational> point;
  for (int v : vars) point[v] = rng.rational();
  return point;
}

// x / (1 - c x) as a truncated series: the standard commuting family,
// f_c o f_d = f_{c+d}.
inline latmap::UnivariateSeries mobius_series(const Rational& c, int order) {
  latmap::UnivariateSeries s{order, {}};
  Rational power = 1;
  for (int d = 1; d <= order; ++d) {
    s.coeffs[d] = power;
    power *= c;
    if (power == 0) break;
  }
  return s;
}

// Direct-composition oracle on dense coefficient vectors, independent of the
// polynomial machinery: returns coefficients 1..order of f(g(x)).
inline std::vector<Rational> compose_dense(const std::vector<Rational>& f,
                                           const std::vector<Rational>& g,
                                           int order) {
  // f, g: index d-1 holds the degree-d coefficient
  std::vector<std::vector<Rational>> g_pow(static_cast<size_t>(order) + 1,
                                           std::vector<Rational>(order, 0));
  // g^1
  for (int d = 1; d <= order; ++d) g_pow[1][d - 1] = g[d - 1];
  for (int p = 2; p <= order; ++p)
    for (int a = 1; a <= order; ++a)
      for (int b = 1; a + b <= order; ++b)
        g_pow[p][a + b - 1] += g_pow[p - 1][a - 1] * g[b - 1];
  std::vector<Rational> out(order, 0);
  for (int s = 1; s <= order; ++s)
    for (int d = s; d <= order; ++d) out[d - 1] += f[s - 1] * g_pow[s][d - 1];
  return out;
}

// Random exact state on all six faces, numerators in [-9, 9], denominators
// in [1, 9].
inline PointState<Rational> random_exact_state(Rng& rng) {
  PointState<Rational> st{4, {}};
  for (const FaceVariable& f : latmap::enumerate_faces(4))
    st.values[f] = rng.rational();
  return st;
}

// Random float state with all values in [-0.3, 0.3].
inline PointState<double> random_float_state(Rng& rng) {
  PointState<double> st{4, {}};
  for (const FaceVariable& f : latmap::enumerate_faces(4))
    st.values[f] = rng.real(-0.3, 0.3);
  return st;
}

}  // namespace testutil
