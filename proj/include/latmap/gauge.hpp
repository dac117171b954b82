#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "latmap/map_family.hpp"

namespace latmap {

// Per-face reparameterization  g_ij(u) = c_ij (u + sum_{m>=2} b_ij^(m) u^m),
// c_ij nonzero. Faces absent from both tables carry the identity. Acting on
// a family means substituting the gauged variables into every component and
// undoing the face's own series afterwards:  T  ->  g^{-1} . T . g.
class GaugeTransformation {
 public:
  const std::map<FaceVariable, Rational>& scalings() const { return scalings_; }
  const std::map<FaceVariable, std::map<int, Rational>>& point_terms() const {
    return point_terms_;
  }

  Rational scaling(const FaceVariable& f) const {
    auto it = scalings_.find(f);
    return it == scalings_.end() ? Rational(1) : it->second;
  }

  Rational point_term(const FaceVariable& f, int m) const {
    auto it = point_terms_.find(f);
    if (it == point_terms_.end()) return 0;
    auto jt = it->second.find(m);
    return jt == it->second.end() ? Rational(0) : jt->second;
  }

  void set_scaling(const FaceVariable& f, const Rational& c) {
    if (c == 0) throw std::invalid_argument("gauge scaling must be nonzero");
    if (c == 1)
      scalings_.erase(f);
    else
      scalings_[f] = c;
  }

  void set_point_term(const FaceVariable& f, int m, const Rational& b) {
    if (m < 2) throw std::invalid_argument("point term degree must be >= 2");
    if (b == 0) {
      auto it = point_terms_.find(f);
      if (it != point_terms_.end()) {
        it->second.erase(m);
        if (it->second.empty()) point_terms_.erase(it);
      }
    } else {
      point_terms_[f][m] = b;
    }
  }

  bool is_identity() const {
    return scalings_.empty() && point_terms_.empty();
  }

  // g_ij as a polynomial in `var`, truncated at `order`.
  Polynomial series(const FaceVariable& f, int var, int order) const {
    Polynomial s = Polynomial::variable(var);
    auto it = point_terms_.find(f);
    if (it != point_terms_.end())
      for (const auto& [m, b] : it->second)
        if (m <= order) s.add_term(Monomial::variable(var, m), b);
    s *= scaling(f);
    return s;
  }

  // Series reversion: h with g(h(u)) = u up to the truncation order.
  Polynomial inverse_series(const FaceVariable& f, int var, int order) const {
    Rational c = scaling(f);
    Polynomial h = Polynomial::variable(var) * (Rational(1) / c);
    Polynomial g = series(f, var, order);
    for (int m = 2; m <= order; ++m) {
      Polynomial comp = g.substituted({{var, h}}, m);
      Rational excess = comp.coefficient(Monomial::variable(var, m));
      if (excess != 0) h.add_term(Monomial::variable(var, m), -excess / c);
    }
    return h;
  }

  friend bool operator==(const GaugeTransformation& a,
                         const GaugeTransformation& b) {
    return a.scalings_ == b.scalings_ && a.point_terms_ == b.point_terms_;
  }

 private:
  std::map<FaceVariable, Rational> scalings_;
  std::map<FaceVariable, std::map<int, Rational>> point_terms_;
};

// g^{-1} . T . g, truncated at the family's order.
inline MapFamily conjugate(const MapFamily& fam, const GaugeTransformation& g) {
  const int n = fam.n(), order = fam.order();
  for (const auto& [f, c] : g.scalings())
    if (f.j > n)
      throw ValidationError("gauge face " + f.digits() + " outside dimension");
  for (const auto& [f, terms] : g.point_terms())
    if (f.j > n)
      throw ValidationError("gauge face " + f.digits() + " outside dimension");

  std::map<int, Polynomial> forward;
  std::map<FaceVariable, Polynomial> backward;
  for (const FaceVariable& f : enumerate_faces(n)) {
    int id = face_variable_id(f, n);
    forward[id] = g.series(f, id, order);
    backward[f] = g.inverse_series(f, id, order);
  }

  MapFamily out(n, order, fam.symmetry());
  SubstitutionCache cache;
  for (const ComponentKey& key : component_keys(n)) {
    Polynomial inner = fam.shift_series(key).substituted(forward, order, &cache);
    int id = face_variable_id(key.face, n);
    Polynomial conjugated =
        backward[key.face].substituted({{id, inner}}, order);
    Polynomial tail = conjugated - Polynomial::variable(id);
    if (!tail.is_zero() && tail.min_degree() < 2)
      throw std::logic_error("conjugation broke the identity-perturbation shape");
    for (int d = 2; d <= order; ++d)
      out.set_term(key, d, tail.homogeneous_part(d));
  }
  return out;
}

// outer(inner(u)) per face, re-expressed in scaling/point-term form.
inline GaugeTransformation compose_gauges(const GaugeTransformation& outer,
                                          const GaugeTransformation& inner,
                                          int order) {
  std::set<FaceVariable> faces;
  for (const auto& [f, c] : outer.scalings()) faces.insert(f);
  for (const auto& [f, t] : outer.point_terms()) faces.insert(f);
  for (const auto& [f, c] : inner.scalings()) faces.insert(f);
  for (const auto& [f, t] : inner.point_terms()) faces.insert(f);

  GaugeTransformation out;
  for (const FaceVariable& f : faces) {
    Polynomial po = outer.series(f, 0, order);
    Polynomial pi = inner.series(f, 0, order);
    Polynomial comp = po.substituted({{0, pi}}, order);
    Rational c = comp.coefficient(Monomial::variable(0));
    out.set_scaling(f, c);
    for (int m = 2; m <= order; ++m) {
      Rational b = comp.coefficient(Monomial::variable(0, m));
      out.set_point_term(f, m, b / c);
    }
  }
  return out;
}

// The degree-(m+1) families that the degree-(m+2) consistency conditions
// cannot see: for parameters b on faces,
//
//   K_{ij;k} = x_ik x_jk (m b_ij x_ij^{m-1} - b_ik x_ik^{m-1} - b_jk x_jk^{m-1}).
//
// Conjugation by the point gauge x_ij -> x_ij + b_ij x_ij^m subtracts exactly
// this from the degree-(m+1) terms, which is why the normal form below can
// remove one slice coefficient per face and per order.
inline MapFamily kernel_element(const std::map<FaceVariable, Rational>& b,
                                int m, int n = 4) {
  if (m < 2) throw std::invalid_argument("kernel degree parameter must be >= 2");
  MapFamily out(n, m + 1);
  auto value = [&](const FaceVariable& f) -> Rational {
    auto it = b.find(f);
    return it == b.end() ? Rational(0) : it->second;
  };
  for (const ComponentKey& key : component_keys(n)) {
    auto scope = out.scope_ids(key);
    FaceVariable fik(key.face.i, key.dir), fjk(key.face.j, key.dir);
    Polynomial p;
    p.add_term(Monomial::from_entries({{scope[0], m - 1}, {scope[1], 1},
                                       {scope[2], 1}}),
               value(key.face) * m);
    p.add_term(Monomial::from_entries({{scope[1], m}, {scope[2], 1}}),
               -value(fik));
    p.add_term(Monomial::from_entries({{scope[1], 1}, {scope[2], m}}),
               -value(fjk));
    out.set_term(key, m + 1, p);
  }
  return out;
}

// Gauge normalization of a family whose quadratic part is exactly
// A^(2) = x_ik x_jk: point gauges of increasing degree remove, order by
// order, the coefficient of x_ij^{m-1} x_ik x_jk from every A^(m+1). The two
// shift directions of a face must agree on that coefficient; when they do
// not, no point gauge can normalize the family and NormalFormError is
// raised. Returns the normalized family and the accumulated gauge.
inline std::pair<MapFamily, GaugeTransformation> normal_form(
    const MapFamily& fam) {
  const int n = fam.n(), order = fam.order();
  for (const ComponentKey& key : component_keys(n)) {
    auto scope = fam.scope_ids(key);
    Polynomial darboux_head;
    darboux_head.add_term(Monomial::from_entries({{scope[1], 1}, {scope[2], 1}}),
                          1);
    if (fam.term(key, 2) != darboux_head)
      throw BranchMismatch("component " + key.label() +
                           ": quadratic part is not x_ik x_jk");
  }

  MapFamily cur = fam;
  GaugeTransformation total;
  for (int m = 2; m + 1 <= order; ++m) {
    std::map<FaceVariable, Rational> b;
    for (const FaceVariable& f : enumerate_faces(n)) {
      std::optional<Rational> gamma;
      for (int k = 1; k <= n; ++k) {
        if (f.contains(k)) continue;
        ComponentKey key{f, k};
        auto scope = cur.scope_ids(key);
        Monomial slice = Monomial::from_entries(
            {{scope[0], m - 1}, {scope[1], 1}, {scope[2], 1}});
        Rational g = cur.term(key, m + 1).coefficient(slice);
        if (!gamma) {
          gamma = g;
        } else if (*gamma != g) {
          throw NormalFormError(
              "face " + f.digits() + ": slice coefficient at degree " +
              std::to_string(m + 1) + " differs between shift directions");
        }
      }
      if (gamma && *gamma != 0) b[f] = *gamma / m;
    }
    if (b.empty()) continue;
    GaugeTransformation step;
    for (const auto& [f, val] : b) step.set_point_term(f, m, val);
    cur = conjugate(cur, step);
    total = compose_gauges(total, step, order);
  }

  for (int m = 2; m + 1 <= order; ++m)
    for (const ComponentKey& key : component_keys(n)) {
      auto scope = cur.scope_ids(key);
      Monomial slice = Monomial::from_entries(
          {{scope[0], m - 1}, {scope[1], 1}, {scope[2], 1}});
      if (cur.term(key, m + 1).coefficient(slice) != 0)
        throw std::logic_error("normal form left a nonzero slice coefficient");
    }
  return {std::move(cur), std::move(total)};
}

// ---- canonical JSON form ----------------------------------------------
//
// {"scalings": {"12": "2"}, "point": {"12": {"2": "1/3"}}}
//
// Face keys are digit pairs; identity entries are omitted.

inline nlohmann::ordered_json gauge_to_json(const GaugeTransformation& g) {
  nlohmann::ordered_json doc;
  doc["scalings"] = nlohmann::ordered_json::object();
  for (const auto& [f, c] : g.scalings())
    doc["scalings"][f.digits()] = to_string(c);
  doc["point"] = nlohmann::ordered_json::object();
  for (const auto& [f, terms] : g.point_terms()) {
    nlohmann::ordered_json entry = nlohmann::ordered_json::object();
    for (const auto& [m, b] : terms) entry[std::to_string(m)] = to_string(b);
    doc["point"][f.digits()] = entry;
  }
  return doc;
}

namespace detail {
inline FaceVariable face_from_digits(const std::string& key) {
  if (key.size() != 2 || key[0] < '1' || key[0] > '9' || key[1] < '1' ||
      key[1] > '9' || key[0] == key[1])
    throw ValidationError("bad face key '" + key + "'");
  return FaceVariable(key[0] - '0', key[1] - '0');
}
}  // namespace detail

inline GaugeTransformation gauge_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("gauge document must be an object");
  detail::require_keys(doc, {"scalings", "point"}, "gauge");
  GaugeTransformation g;
  if (doc.contains("scalings")) {
    if (!doc["scalings"].is_object())
      throw ParseError("gauge scalings must be an object");
    for (const auto& [key, val] : doc["scalings"].items()) {
      if (!val.is_string()) throw ParseError("gauge scaling must be a string");
      Rational c = parse_rational(val.get<std::string>());
      if (c == 0)
        throw ValidationError("gauge scaling on face " + key + " is zero");
      g.set_scaling(detail::face_from_digits(key), c);
    }
  }
  if (doc.contains("point")) {
    if (!doc["point"].is_object())
      throw ParseError("gauge point table must be an object");
    for (const auto& [key, terms] : doc["point"].items()) {
      FaceVariable f = detail::face_from_digits(key);
      if (!terms.is_object())
        throw ParseError("gauge point terms must be an object");
      for (const auto& [deg, val] : terms.items()) {
        int m;
        try {
          size_t used = 0;
          m = std::stoi(deg, &used);
          if (used != deg.size()) throw std::invalid_argument(deg);
        } catch (const std::exception&) {
          throw ParseError("bad point-term degree '" + deg + "'");
        }
        if (m < 2)
          throw ValidationError("point-term degree must be >= 2, got " + deg);
        if (!val.is_string())
          throw ParseError("gauge point term must be a string");
        g.set_point_term(f, m, parse_rational(val.get<std::string>()));
      }
    }
  }
  return g;
}

inline GaugeTransformation gauge_from_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad JSON: ") + e.what());
  }
  return gauge_from_json(doc);
}

inline GaugeTransformation load_gauge(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return gauge_from_text(text);
}

}  // namespace latmap
