#pragma once

#include <cmath>
#include <type_traits>

#include "latmap/map_family.hpp"

namespace latmap {

// The two closed-form 3D maps the library knows how to evaluate and (for the
// first one) expand as a series. The symmetric one is the Darboux-type map
//
//   T_k x_ij = (x_ij + x_ik x_jk) / (sqrt(1 - x_ik^2) sqrt(1 - x_jk^2)),
//
// the skew one is the star-triangle map
//
//   T_k x_ij = -x_ij / (x_ij x_jk + x_jk x_ki + x_ki x_ij),   x_ji = -x_ij.
//
// The star-triangle map has no identity-perturbation series (its identity
// locus sits at infinity), so it only ever appears in closed form.
enum class MapKind { darboux, star_triangle };

struct ClosedFormMap {
  MapKind kind;

  Symmetry symmetry() const {
    return kind == MapKind::darboux ? Symmetry::symmetric : Symmetry::skew;
  }
};

namespace detail {
template <class Scalar>
Scalar scalar_abs(const Scalar& x) {
  if constexpr (std::is_same_v<Scalar, Rational>)
    return x < 0 ? Scalar(-x) : x;
  else
    return std::abs(x);
}
}  // namespace detail

// T_dir x_face at a concrete state. Exact evaluation is available for the
// star-triangle map only; the Darboux map needs square roots and is
// floating-point. Leaving the domain (square-root argument not positive, or
// a vanishing/near-vanishing star-triangle denominator) raises DomainError.
template <class Scalar>
Scalar eval_closed_form(const ClosedFormMap& map, const FaceVariable& face,
                        int dir, const PointState<Scalar>& state) {
  if (face.contains(dir))
    throw std::invalid_argument("shift direction lies in the face");
  const int i = face.i, j = face.j, k = dir;
  const Symmetry sym = map.symmetry();
  if (map.kind == MapKind::darboux) {
    if constexpr (!std::is_same_v<Scalar, double>) {
      throw std::invalid_argument(
          "darboux closed form requires float evaluation");
    } else {
      double xij = state.get(i, j, sym);
      double xik = state.get(i, k, sym);
      double xjk = state.get(j, k, sym);
      double u = 1.0 - xik * xik, v = 1.0 - xjk * xjk;
      if (u <= 0.0 || v <= 0.0)
        throw DomainError("state outside |x| < 1 on face " +
                          FaceVariable(i, k).digits() + " or " +
                          FaceVariable(j, k).digits());
      return (xij + xik * xjk) / (std::sqrt(u) * std::sqrt(v));
    }
  }
  // Star-triangle: all cyclic products use the skew orientation.
  Scalar xij = state.get(i, j, sym);
  Scalar xjk = state.get(j, k, sym);
  Scalar xki = state.get(k, i, sym);
  Scalar den = xij * xjk + xjk * xki + xki * xij;
  if constexpr (std::is_same_v<Scalar, Rational>) {
    if (den == 0) throw DomainError("star-triangle denominator vanishes");
  } else {
    if (detail::scalar_abs(den) < 1e-9)
      throw DomainError("star-triangle denominator nearly vanishes");
  }
  return -xij / den;
}

// Series expansion of the Darboux-type map around the identity, truncated at
// the given order: every component carries the same role-shaped generator
//
//   (u + vw) (1 - v^2)^{-1/2} (1 - w^2)^{-1/2} - u,  (u, v, w) = roles.
inline MapFamily expand_darboux(int order) {
  if (order < 2) throw std::invalid_argument("need order >= 2");
  auto inv_sqrt_series = [order](int var) {
    // (1 - t)^{-1/2} = sum_m binom(2m, m) / 4^m t^m at t = var^2.
    Polynomial s = Polynomial::constant(1);
    BigInt binom = 1, power4 = 1;
    for (int m = 1; 2 * m <= order; ++m) {
      binom = binom * 2 * (2 * m - 1) / m;
      power4 *= 4;
      s.add_term(Monomial::variable(var, 2 * m), Rational(binom, power4));
    }
    return s;
  };
  Polynomial u = Polynomial::variable(kRoleIJ);
  Polynomial head = u + Polynomial::variable(kRoleIK) *
                            Polynomial::variable(kRoleJK);
  Polynomial gen = multiply(
      multiply(head, inv_sqrt_series(kRoleIK), order),
      inv_sqrt_series(kRoleJK), order);
  gen -= u;
  return MapFamily::from_generator(4, order, gen);
}

// Truncated power series x + c_2 x^2 + ... in one variable; the linear
// coefficient is stored like any other so general series fit too.
struct UnivariateSeries {
  int order = 1;
  std::map<int, Rational> coeffs;  // degree -> nonzero coefficient

  static UnivariateSeries identity(int order) {
    UnivariateSeries s{order, {{1, Rational(1)}}};
    return s;
  }

  Rational coeff(int d) const {
    auto it = coeffs.find(d);
    return it == coeffs.end() ? Rational(0) : it->second;
  }

  void set_coeff(int d, const Rational& c) {
    if (d < 1 || d > order)
      throw std::invalid_argument("series degree out of range");
    if (c == 0)
      coeffs.erase(d);
    else
      coeffs[d] = c;
  }

  bool tangent_to_identity() const { return coeff(1) == 1; }

  friend bool operator==(const UnivariateSeries& a, const UnivariateSeries& b) {
    return a.order == b.order && a.coeffs == b.coeffs;
  }
};

// f(g(x)) truncated at `order`.
inline UnivariateSeries univariate_compose(const UnivariateSeries& f,
                                           const UnivariateSeries& g,
                                           int order) {
  Polynomial pf, pg;
  for (const auto& [d, c] : f.coeffs) pf.add_term(Monomial::variable(0, d), c);
  for (const auto& [d, c] : g.coeffs) pg.add_term(Monomial::variable(0, d), c);
  Polynomial comp = pf.substituted({{0, pg}}, order);
  UnivariateSeries out{order, {}};
  for (const auto& [m, c] : comp.terms()) out.coeffs[m.degree()] = c;
  return out;
}

}  // namespace latmap
