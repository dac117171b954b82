#pragma once

#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "latmap/closed_form.hpp"
#include "latmap/map_family.hpp"

namespace latmap {

// Stage one of the consistency check: the images T_k x_uv as full series,
// for every direction k and every face uv not containing k.
struct ShiftImages {
  int dir = 0;
  std::map<FaceVariable, Polynomial> image;
};

inline std::map<int, ShiftImages> first_stage(const MapFamily& fam) {
  std::map<int, ShiftImages> out;
  for (int k = 1; k <= fam.n(); ++k) {
    ShiftImages s{k, {}};
    for (const FaceVariable& f : enumerate_faces(fam.n()))
      if (!f.contains(k)) s.image[f] = fam.shift_series({f, k});
    out[k] = std::move(s);
  }
  return out;
}

// One commutator T_l(T_k x_ij) - T_k(T_l x_ij), truncated. The identity and
// linear parts cancel structurally, so the residual starts at degree 2.
struct ResidualEquation {
  FaceVariable face;
  int k = 0, l = 0;  // k < l, both outside the face
  Polynomial residual;

  std::optional<int> first_nonzero_degree() const {
    if (residual.is_zero()) return std::nullopt;
    return residual.min_degree();
  }
};

struct ResidualReport {
  int max_degree = 0;
  std::vector<ResidualEquation> equations;  // faces ascending, then (k, l)

  bool all_zero() const {
    for (const auto& eq : equations)
      if (!eq.residual.is_zero()) return false;
    return true;
  }

  struct Failure {
    FaceVariable face{1, 2};
    int k = 0, l = 0, degree = 0;
  };

  // Lowest failing degree wins; ties go to the first equation in order.
  std::optional<Failure> first_failure() const {
    std::optional<Failure> best;
    for (const auto& eq : equations) {
      auto d = eq.first_nonzero_degree();
      if (d && (!best || *d < best->degree))
        best = Failure{eq.face, eq.k, eq.l, *d};
    }
    return best;
  }
};

// All equations T_l T_k x_ij = T_k T_l x_ij with {i,j}, k < l disjoint,
// truncated at max_degree. For dimension 4 these are the six face equations
// of the 4D cube, one per face, indexed by the complementary pair.
inline ResidualReport second_stage_residual(const MapFamily& fam,
                                            int max_degree) {
  if (max_degree < 2 || max_degree > fam.order())
    throw std::invalid_argument("residual degree outside [2, order]");
  auto shifts = first_stage(fam);

  // One assignment and one power cache per outer direction; the cache is
  // what keeps repeated substitution of the same images affordable.
  std::map<int, std::map<int, Polynomial>> assign;
  std::map<int, SubstitutionCache> cache;
  for (const auto& [dir, s] : shifts)
    for (const auto& [f, img] : s.image)
      assign[dir][face_variable_id(f, fam.n())] = img;

  ResidualReport report{max_degree, {}};
  for (const FaceVariable& f : enumerate_faces(fam.n())) {
    for (int k = 1; k <= fam.n(); ++k) {
      if (f.contains(k)) continue;
      for (int l = k + 1; l <= fam.n(); ++l) {
        if (f.contains(l) || l == k) continue;
        const Polynomial& pk = shifts[k].image[f];
        const Polynomial& pl = shifts[l].image[f];
        Polynomial lhs = pk.substituted(assign[l], max_degree, &cache[l]);
        Polynomial rhs = pl.substituted(assign[k], max_degree, &cache[k]);
        Polynomial res = lhs - rhs;
        if (!res.is_zero() && res.min_degree() < 2)
          throw std::logic_error("residual has sub-quadratic terms");
        report.equations.push_back({f, k, l, std::move(res)});
      }
    }
  }
  return report;
}

inline bool residual_is_zero(const MapFamily& fam, int max_degree) {
  return second_stage_residual(fam, max_degree).all_zero();
}

inline nlohmann::ordered_json residual_report_to_json(
    const ResidualReport& report, int n) {
  nlohmann::ordered_json doc;
  doc["max_degree"] = report.max_degree;
  doc["consistent"] = report.all_zero();
  if (auto fail = report.first_failure()) {
    doc["first_failure"] = {{"face", {fail->face.i, fail->face.j}},
                            {"pair", {fail->k, fail->l}},
                            {"degree", fail->degree}};
  } else {
    doc["first_failure"] = nullptr;
  }
  doc["equations"] = nlohmann::ordered_json::array();
  for (const auto& eq : report.equations) {
    nlohmann::ordered_json e;
    e["face"] = {eq.face.i, eq.face.j};
    e["pair"] = {eq.k, eq.l};
    std::vector<int> degrees;
    for (int d = 2; d <= report.max_degree; ++d)
      if (!eq.residual.homogeneous_part(d).is_zero()) degrees.push_back(d);
    e["nonzero_degrees"] = degrees;
    e["terms"] = nlohmann::ordered_json::array();
    for (const auto& [mono, coeff] : eq.residual.terms()) {
      nlohmann::ordered_json t;
      t["coeff"] = to_string(coeff);
      nlohmann::ordered_json exps = nlohmann::ordered_json::object();
      for (const auto& [var, exp] : mono.entries())
        exps[face_from_id(var, n).digits()] = exp;
      t["exps"] = exps;
      e["terms"].push_back(t);
    }
    doc["equations"].push_back(e);
  }
  return doc;
}

// ---- numeric cross-check against the closed forms ---------------------

template <class Scalar>
struct NumericDeviation {
  FaceVariable face{1, 2};
  int k = 0, l = 0;
  Scalar magnitude{};
};

// |T_l T_k x_ij - T_k T_l x_ij| at a concrete state for all six equations.
// Domain violations while evaluating (including ones that only appear after
// the first shift) surface as DomainError; callers resample.
template <class Scalar>
std::vector<NumericDeviation<Scalar>> numeric_residual(
    const ClosedFormMap& map, const PointState<Scalar>& state) {
  if (state.n != 4)
    throw std::invalid_argument("numeric check needs dimension 4");
  std::map<int, std::map<FaceVariable, Scalar>> val;
  for (int k = 1; k <= 4; ++k)
    for (const FaceVariable& f : enumerate_faces(4))
      if (!f.contains(k))
        val[k][f] = eval_closed_form(map, f, k, state);

  std::vector<NumericDeviation<Scalar>> rows;
  for (const FaceVariable& f : enumerate_faces(4)) {
    std::vector<int> rest;
    for (int d = 1; d <= 4; ++d)
      if (!f.contains(d)) rest.push_back(d);
    const int k = rest[0], l = rest[1];
    auto shifted = [&](int outer, int inner) {
      PointState<Scalar> mid{4, {}};
      for (const FaceVariable& g :
           {f, FaceVariable(f.i, inner), FaceVariable(f.j, inner)})
        mid.values[g] = val[outer][g];
      return eval_closed_form(map, f, inner, mid);
    };
    Scalar a = shifted(l, k);  // T_l T_k x_ij
    Scalar b = shifted(k, l);  // T_k T_l x_ij
    rows.push_back({f, k, l, detail::scalar_abs<Scalar>(a - b)});
  }
  return rows;
}

// Margin used when sampling float states for the Darboux map; keeps the
// initial state away from the square-root singularities.
inline bool darboux_state_within_margin(const PointState<double>& state,
                                        double margin = 1e-3) {
  for (const auto& [f, v] : state.values)
    if (std::abs(v) >= 1.0 - margin) return false;
  return true;
}

}  // namespace latmap
