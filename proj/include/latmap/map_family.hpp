#pragma once

#include <array>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latmap/errors.hpp"
#include "latmap/faces.hpp"
#include "latmap/polynomial.hpp"

namespace latmap {

// How x_ji relates to the stored x_ij (i < j) when values are attached to
// faces. A family carries exactly one flag, so mixed conventions cannot be
// expressed, which is intentional.
enum class Symmetry { symmetric, skew };

inline std::string symmetry_name(Symmetry s) {
  return s == Symmetry::symmetric ? "symmetric" : "skew";
}

inline Symmetry symmetry_from_name(const std::string& s) {
  if (s == "symmetric") return Symmetry::symmetric;
  if (s == "skew") return Symmetry::skew;
  throw ParseError("unknown symmetry '" + s + "'");
}

// One component of a 3D map family: the series for T_dir x_face. dir is
// never an index of face.
struct ComponentKey {
  FaceVariable face;
  int dir;

  std::string label() const { return face.digits() + ";" + std::to_string(dir); }

  friend bool operator==(const ComponentKey& a, const ComponentKey& b) {
    return a.face == b.face && a.dir == b.dir;
  }
  friend bool operator<(const ComponentKey& a, const ComponentKey& b) {
    if (a.face != b.face) return a.face < b.face;
    return a.dir < b.dir;
  }
};

// Canonical component listing: faces in id order, directions ascending.
inline std::vector<ComponentKey> component_keys(int n) {
  std::vector<ComponentKey> keys;
  for (const FaceVariable& f : enumerate_faces(n))
    for (int dir = 1; dir <= n; ++dir)
      if (!f.contains(dir)) keys.push_back({f, dir});
  return keys;
}

// Scratch scalar state on faces; partial assignments are fine as long as
// every face that gets read is present.
template <class Scalar>
struct PointState {
  int n = 4;
  std::map<FaceVariable, Scalar> values;

  // x_ab with orientation resolved by the family's symmetry flag.
  Scalar get(int a, int b, Symmetry sym) const {
    FaceVariable f(a, b);
    auto it = values.find(f);
    if (it == values.end())
      throw std::invalid_argument("state has no value on face " + f.digits());
    if (sym == Symmetry::skew && a > b) return -it->second;
    return it->second;
  }
};

// Role positions of the three variables a component may use. A component
// (face {i,j}, dir k) is a polynomial in x_ij, x_ik, x_jk only; files store
// exponents under these role names so a term means the same thing for every
// component.
enum : int { kRoleIJ = 0, kRoleIK = 1, kRoleJK = 2 };

// A family of 3D maps in series form, one map per 3D coordinate cube, all
// sharing one truncation order: T_k x_ij = x_ij + sum of homogeneous terms
// of degrees 2..order. Terms of degree 0 and 1 beyond the identity are not
// representable, which encodes the identity-perturbation shape.
class MapFamily {
 public:
  MapFamily(int n, int order, Symmetry sym = Symmetry::symmetric)
      : n_(n), order_(order), sym_(sym) {
    if (n < 3) throw std::invalid_argument("need dimension >= 3");
    if (order < 1) throw std::invalid_argument("need order >= 1");
  }

  int n() const { return n_; }
  int order() const { return order_; }
  Symmetry symmetry() const { return sym_; }

  // Global variable ids of (x_ij, x_ik, x_jk) for a component.
  std::array<int, 3> scope_ids(const ComponentKey& key) const {
    return {face_variable_id(key.face, n_),
            face_variable_id(FaceVariable(key.face.i, key.dir), n_),
            face_variable_id(FaceVariable(key.face.j, key.dir), n_)};
  }

  const std::map<int, Polynomial>& terms(const ComponentKey& key) const {
    static const std::map<int, Polynomial> empty;
    auto it = comps_.find(key);
    return it == comps_.end() ? empty : it->second;
  }

  const Polynomial& term(const ComponentKey& key, int degree) const {
    static const Polynomial zero;
    const auto& t = terms(key);
    auto it = t.find(degree);
    return it == t.end() ? zero : it->second;
  }

  // Replaces the degree-`degree` part of a component. The polynomial must be
  // homogeneous of that degree (or zero) and use only the component's scope.
  void set_term(const ComponentKey& key, int degree, const Polynomial& p) {
    validate_key(key);
    if (degree < 2 || degree > order_)
      throw ValidationError("component " + key.label() + ": degree " +
                            std::to_string(degree) + " outside [2, " +
                            std::to_string(order_) + "]");
    if (p.is_zero()) {
      auto it = comps_.find(key);
      if (it != comps_.end()) {
        it->second.erase(degree);
        if (it->second.empty()) comps_.erase(it);
      }
      return;
    }
    if (!p.is_homogeneous() || p.degree() != degree)
      throw ValidationError("component " + key.label() +
                            ": term not homogeneous of degree " +
                            std::to_string(degree));
    auto scope = scope_ids(key);
    for (int v : p.variables())
      if (v != scope[0] && v != scope[1] && v != scope[2])
        throw ValidationError("component " + key.label() +
                              ": variable outside scope in " + p.to_string());
    comps_[key][degree] = p;
  }

  // Full series x_ij + A^(2) + ... + A^(order) of one component.
  Polynomial shift_series(const ComponentKey& key) const {
    Polynomial s = Polynomial::variable(face_variable_id(key.face, n_));
    for (const auto& [d, p] : terms(key)) s += p;
    return s;
  }

  // Same components re-truncated; extending pads with zeros.
  MapFamily with_order(int order) const {
    MapFamily out(n_, order, sym_);
    for (const auto& [key, by_degree] : comps_)
      for (const auto& [d, p] : by_degree)
        if (d <= order) out.comps_[key][d] = p;
    return out;
  }

  // Applies one role-shaped generator (a polynomial in the role variables
  // kRoleIJ, kRoleIK, kRoleJK) to every component. This is how families with
  // index-independent coefficients are built.
  static MapFamily from_generator(int n, int order, const Polynomial& gen,
                                  Symmetry sym = Symmetry::symmetric) {
    MapFamily fam(n, order, sym);
    for (int v : gen.variables())
      if (v != kRoleIJ && v != kRoleIK && v != kRoleJK)
        throw ValidationError("generator uses a non-role variable");
    if (!gen.is_zero() && (gen.degree() > order || gen.min_degree() < 2))
      throw ValidationError("generator degrees outside [2, order]");
    for (const ComponentKey& key : component_keys(n)) {
      auto scope = fam.scope_ids(key);
      std::map<int, int> rename{{kRoleIJ, scope[0]},
                                {kRoleIK, scope[1]},
                                {kRoleJK, scope[2]}};
      Polynomial local = gen.renamed(rename);
      for (int d = 2; d <= order; ++d)
        fam.set_term(key, d, local.homogeneous_part(d));
    }
    return fam;
  }

  // Relabels directions by a bijection of {1..n}. Orientation signs never
  // enter because components are polynomials in unordered face variables;
  // series families in this library are symmetric.
  MapFamily permuted(const std::vector<int>& perm) const {
    if (sym_ != Symmetry::symmetric)
      throw std::invalid_argument("permutation needs a symmetric family");
    if (static_cast<int>(perm.size()) != n_)
      throw std::invalid_argument("permutation size mismatch");
    std::set<int> image(perm.begin(), perm.end());
    if (static_cast<int>(image.size()) != n_ || *image.begin() != 1 ||
        *image.rbegin() != n_)
      throw std::invalid_argument("not a bijection of 1..n");
    std::map<int, int> rename;
    for (const FaceVariable& f : enumerate_faces(n_))
      rename[face_variable_id(f, n_)] =
          face_variable_id(FaceVariable(perm[f.i - 1], perm[f.j - 1]), n_);
    MapFamily out(n_, order_, sym_);
    for (const auto& [key, by_degree] : comps_) {
      ComponentKey new_key{
          FaceVariable(perm[key.face.i - 1], perm[key.face.j - 1]),
          perm[key.dir - 1]};
      for (const auto& [d, p] : by_degree)
        out.comps_[new_key][d] = p.renamed(rename);
    }
    return out;
  }

  friend bool operator==(const MapFamily& a, const MapFamily& b) {
    return a.n_ == b.n_ && a.order_ == b.order_ && a.sym_ == b.sym_ &&
           a.comps_ == b.comps_;
  }
  friend bool operator!=(const MapFamily& a, const MapFamily& b) {
    return !(a == b);
  }

 private:
  void validate_key(const ComponentKey& key) const {
    if (key.face.j > n_ || key.dir < 1 || key.dir > n_)
      throw ValidationError("component " + key.label() + " outside dimension " +
                            std::to_string(n_));
    if (key.face.contains(key.dir))
      throw ValidationError("component " + key.label() +
                            ": direction lies in the face");
  }

  int n_, order_;
  Symmetry sym_;
  std::map<ComponentKey, std::map<int, Polynomial>> comps_;
};

// Component-wise sum; orders may differ, the result takes the larger one.
inline MapFamily family_sum(const MapFamily& a, const MapFamily& b) {
  if (a.n() != b.n() || a.symmetry() != b.symmetry())
    throw std::invalid_argument("families not addable");
  MapFamily out = a.with_order(std::max(a.order(), b.order()));
  for (const ComponentKey& key : component_keys(a.n()))
    for (const auto& [d, p] : b.terms(key))
      out.set_term(key, d, out.term(key, d) + p);
  return out;
}

// ---- canonical JSON form ----------------------------------------------
//
// {
//   "n": 4, "order": 6, "symmetry": "symmetric",
//   "components": [
//     {"face": [1,2], "dir": 3,
//      "terms": [{"coeff": "1", "exps": {"ij": 0, "ik": 1, "jk": 1}}, ...]},
//     ...]
// }
//
// Rationals are strings in lowest terms. Every component appears, terms are
// sorted by (degree, canonical monomial order), and all three role exponents
// are written, so serialization is byte-stable.

inline nlohmann::ordered_json family_to_json(const MapFamily& fam) {
  nlohmann::ordered_json doc;
  doc["n"] = fam.n();
  doc["order"] = fam.order();
  doc["symmetry"] = symmetry_name(fam.symmetry());
  doc["components"] = nlohmann::ordered_json::array();
  for (const ComponentKey& key : component_keys(fam.n())) {
    nlohmann::ordered_json comp;
    comp["face"] = {key.face.i, key.face.j};
    comp["dir"] = key.dir;
    comp["terms"] = nlohmann::ordered_json::array();
    auto scope = fam.scope_ids(key);
    for (const auto& [d, poly] : fam.terms(key)) {
      for (const auto& [mono, coeff] : poly.terms()) {
        nlohmann::ordered_json term;
        term["coeff"] = to_string(coeff);
        term["exps"] = {{"ij", mono.exponent_of(scope[0])},
                        {"ik", mono.exponent_of(scope[1])},
                        {"jk", mono.exponent_of(scope[2])}};
        comp["terms"].push_back(term);
      }
    }
    doc["components"].push_back(comp);
  }
  return doc;
}

namespace detail {

inline void require_keys(const nlohmann::json& obj,
                         const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k))
      throw ValidationError(where + ": unknown key '" + k + "'");
}

inline int require_int(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_integer())
    throw ParseError(where + ": expected an integer");
  return j.get<int>();
}

}  // namespace detail

inline MapFamily family_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("family document must be an object");
  detail::require_keys(doc, {"n", "order", "symmetry", "components"},
                       "family");
  for (const char* k : {"n", "order", "symmetry", "components"})
    if (!doc.contains(k))
      throw ValidationError(std::string("family: missing key '") + k + "'");
  int n = detail::require_int(doc["n"], "n");
  int order = detail::require_int(doc["order"], "order");
  if (n < 3) throw ValidationError("family: n must be at least 3");
  if (order < 1) throw ValidationError("family: order must be at least 1");
  if (!doc["symmetry"].is_string())
    throw ParseError("symmetry: expected a string");
  MapFamily fam(n, order,
                symmetry_from_name(doc["symmetry"].get<std::string>()));
  if (!doc["components"].is_array())
    throw ParseError("components: expected an array");
  std::set<ComponentKey> seen;
  for (const auto& comp : doc["components"]) {
    if (!comp.is_object()) throw ParseError("component: expected an object");
    detail::require_keys(comp, {"face", "dir", "terms"}, "component");
    if (!comp.contains("face") || !comp.contains("dir"))
      throw ValidationError("component: missing face or dir");
    const auto& face = comp["face"];
    if (!face.is_array() || face.size() != 2)
      throw ParseError("component face: expected [i, j]");
    int i = detail::require_int(face[0], "face index");
    int j = detail::require_int(face[1], "face index");
    if (i < 1 || j < 1 || i > n || j > n || i == j)
      throw ValidationError("component: bad face [" + std::to_string(i) +
                            ", " + std::to_string(j) + "]");
    int dir = detail::require_int(comp["dir"], "dir");
    ComponentKey key{FaceVariable(i, j), dir};
    if (dir < 1 || dir > n || key.face.contains(dir))
      throw ValidationError("component " + key.face.digits() +
                            ": bad direction " + std::to_string(dir));
    if (!seen.insert(key).second)
      throw ValidationError("component " + key.label() + ": duplicate");
    auto scope = fam.scope_ids(key);
    std::map<int, Polynomial> by_degree;
    if (comp.contains("terms")) {
      if (!comp["terms"].is_array())
        throw ParseError("component " + key.label() +
                         ": terms must be an array");
      for (const auto& term : comp["terms"]) {
        if (!term.is_object())
          throw ParseError("component " + key.label() +
                           ": term must be an object");
        detail::require_keys(term, {"coeff", "exps"},
                             "component " + key.label() + " term");
        if (!term.contains("coeff") || !term.contains("exps"))
          throw ValidationError("component " + key.label() +
                                ": term missing coeff or exps");
        if (!term["coeff"].is_string())
          throw ParseError("component " + key.label() +
                           ": coeff must be a string");
        Rational coeff;
        try {
          coeff = parse_rational(term["coeff"].get<std::string>());
        } catch (const ParseError& e) {
          throw ParseError("component " + key.label() + ": " + e.what());
        }
        const auto& exps = term["exps"];
        if (!exps.is_object())
          throw ParseError("component " + key.label() +
                           ": exps must be an object");
        detail::require_keys(exps, {"ij", "ik", "jk"},
                             "component " + key.label() + " exps");
        int e[3] = {0, 0, 0};
        const char* role_names[3] = {"ij", "ik", "jk"};
        for (int r = 0; r < 3; ++r) {
          if (!exps.contains(role_names[r])) continue;
          e[r] = detail::require_int(exps[role_names[r]],
                                     std::string("exps.") + role_names[r]);
          if (e[r] < 0)
            throw ValidationError("component " + key.label() +
                                  ": negative exponent");
        }
        int degree = e[0] + e[1] + e[2];
        if (degree < 2 || degree > order)
          throw ValidationError(
              "component " + key.label() + ": term of degree " +
              std::to_string(degree) + " outside [2, " +
              std::to_string(order) + "]");
        Monomial mono = Monomial::from_entries(
            {{scope[0], e[0]}, {scope[1], e[1]}, {scope[2], e[2]}});
        by_degree[degree].add_term(mono, coeff);
      }
    }
    for (const auto& [d, p] : by_degree) fam.set_term(key, d, p);
  }
  return fam;
}

inline std::string family_to_text(const MapFamily& fam) {
  return family_to_json(fam).dump(2) + "\n";
}

inline MapFamily family_from_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad JSON: ") + e.what());
  }
  return family_from_json(doc);
}

inline void save_family(const MapFamily& fam, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << family_to_text(fam);
}

inline MapFamily load_family(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return family_from_text(text);
}

}  // namespace latmap
