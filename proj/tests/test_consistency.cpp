#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "helpers.hpp"
#include "latmap/consistency.hpp"
#include "latmap/gauge.hpp"

using latmap::ComponentKey;
using latmap::FaceVariable;
using latmap::MapFamily;
using latmap::Monomial;
using latmap::Polynomial;
using latmap::Rational;
using latmap::ResidualReport;
using latmap::component_keys;
using latmap::enumerate_faces;
using latmap::expand_darboux;
using latmap::face_variable_id;
using latmap::first_stage;
using latmap::kernel_element;
using latmap::residual_is_zero;
using latmap::second_stage_residual;
using testutil::Rng;

namespace {
int fid(int a, int b) { return face_variable_id(FaceVariable(a, b), 4); }
}  // namespace

TEST_CASE("first stage produces one image per face and direction") {
  MapFamily fam = expand_darboux(3);
  auto shifts = first_stage(fam);
  CHECK(shifts.size() == 4);
  for (const auto& [dir, s] : shifts) {
    CHECK(s.dir == dir);
    CHECK(s.image.size() == 3);  // faces avoiding one direction of four
    for (const auto& [f, img] : s.image) {
      CHECK(!f.contains(dir));
      CHECK(img == fam.shift_series({f, dir}));
    }
  }
}

TEST_CASE("residual equations cover the six faces in canonical order") {
  MapFamily fam(4, 3);
  ResidualReport report = second_stage_residual(fam, 3);
  REQUIRE(report.equations.size() == 6);
  auto faces = enumerate_faces(4);
  for (size_t e = 0; e < 6; ++e) {
    CHECK(report.equations[e].face == faces[e]);
    CHECK(report.equations[e].k < report.equations[e].l);
    CHECK(!faces[e].contains(report.equations[e].k));
    CHECK(!faces[e].contains(report.equations[e].l));
  }
  // the identity family is consistent at every degree
  CHECK(report.all_zero());
  CHECK(!report.first_failure().has_value());
}

TEST_CASE("residual degree range is validated") {
  MapFamily fam(4, 3);
  CHECK_THROWS_AS(second_stage_residual(fam, 1), std::invalid_argument);
  CHECK_THROWS_AS(second_stage_residual(fam, 4), std::invalid_argument);
}

TEST_CASE("the closed-form expansion is consistent through order six") {
  CHECK(residual_is_zero(expand_darboux(6), 6));
}

TEST_CASE("the quadratic truncation obstructs at degree four with the known slice") {
  // with only A^(2) = x_ik x_jk, the degree-4 residual slice for face {i,j}
  // and pair (k, l) comes from substituting the quadratic images into the
  // quadratic term on both sides:
  //   (x_il x_kl)(x_jl x_kl) - (x_ik x_kl)(x_jk x_kl)
  //     = x_il x_jl x_kl^2 - x_ik x_jk x_kl^2
  MapFamily quad = expand_darboux(2).with_order(4);
  ResidualReport report = second_stage_residual(quad, 4);
  CHECK(!report.all_zero());
  auto fail = report.first_failure();
  REQUIRE(fail.has_value());
  CHECK(fail->degree == 4);
  for (const auto& eq : report.equations) {
    REQUIRE(eq.first_nonzero_degree().has_value());
    CHECK(*eq.first_nonzero_degree() == 4);
    const int i = eq.face.i, j = eq.face.j, k = eq.k, l = eq.l;
    Polynomial expected;
    expected.add_term(Monomial::from_entries({{fid(i, l), 1},
                                              {fid(j, l), 1},
                                              {fid(k, l), 2}}),
                      1);
    expected.add_term(Monomial::from_entries({{fid(i, k), 1},
                                              {fid(j, k), 1},
                                              {fid(k, l), 2}}),
                      -1);
    CHECK(eq.residual == expected);
  }
}

TEST_CASE("low residual slices ignore higher family terms") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    MapFamily fam = testutil::random_darboux_headed_family(rng, 6);
    ResidualReport full = second_stage_residual(fam, 4);
    ResidualReport cut = second_stage_residual(fam.with_order(4), 4);
    REQUIRE(full.equations.size() == cut.equations.size());
    for (size_t e = 0; e < full.equations.size(); ++e)
      CHECK(full.equations[e].residual == cut.equations[e].residual);
  }
}

TEST_CASE("an in-scope perturbation of a consistent family is detected") {
  Rng rng(62);
  for (int trial = 0; trial < 10; ++trial) {
    MapFamily fam = expand_darboux(5);
    // corrupt one random component at degree 3 with a non-kernel shape
    auto keys = component_keys(4);
    ComponentKey key = keys[rng.uniform(0, 11)];
    auto s = fam.scope_ids(key);
    Polynomial bump = fam.term(key, 3);
    bump.add_term(Monomial::variable(s[1], 3), rng.nonzero_rational());
    fam.set_term(key, 3, bump);
    ResidualReport report = second_stage_residual(fam, 5);
    auto fail = report.first_failure();
    REQUIRE(fail.has_value());
    CHECK(fail->degree == 4);
  }
}

TEST_CASE("first failure picks the lowest degree across equations") {
  // plant a degree-4 violation on the first face in order and a degree-3
  // violation on the last one; the report must surface the lower degree
  MapFamily fam = expand_darboux(4);
  ComponentKey cubic{FaceVariable(1, 2), 3};
  auto s3 = fam.scope_ids(cubic);
  Polynomial bump3 = fam.term(cubic, 3);
  bump3.add_term(Monomial::variable(s3[0], 3), 1);
  fam.set_term(cubic, 3, bump3);
  ComponentKey quad{FaceVariable(3, 4), 1};
  auto s2 = fam.scope_ids(quad);
  Polynomial bump2 = fam.term(quad, 2);
  bump2.add_term(Monomial::variable(s2[0], 2), 1);
  fam.set_term(quad, 2, bump2);

  ResidualReport report = second_stage_residual(fam, 4);
  // the {1,2} equation fails at degree 4; the quadratic bump surfaces at
  // degree 3 wherever the {34;1} component enters, earliest on face {2,3}
  for (const auto& eq : report.equations) {
    if (eq.face == FaceVariable(1, 2))
      CHECK(eq.first_nonzero_degree() == 4);
    if (eq.face == FaceVariable(3, 4))
      CHECK(eq.first_nonzero_degree() == 3);
  }
  auto fail = report.first_failure();
  REQUIRE(fail.has_value());
  CHECK(fail->degree == 3);
  CHECK(fail->face == FaceVariable(2, 3));
}

TEST_CASE("adding a kernel family preserves consistency at its own order") {
  // the degree-(m+1) kernel families change nothing at degrees <= m+1; their
  // effect starts one order higher, which is the point of the construction
  Rng rng(63);
  for (int m : {2, 3, 4}) {
    std::map<FaceVariable, Rational> b;
    for (const FaceVariable& f : enumerate_faces(4))
      if (rng.chance(70)) b[f] = rng.rational();
    MapFamily sum = latmap::family_sum(expand_darboux(m + 1),
                                       kernel_element(b, m));
    CHECK(residual_is_zero(sum, m + 1));
  }
}

TEST_CASE("consistency is equivariant under direction relabeling") {
  Rng rng(64);
  std::map<FaceVariable, Rational> b;
  for (const FaceVariable& f : enumerate_faces(4)) b[f] = rng.rational();
  MapFamily fam = latmap::family_sum(expand_darboux(4), kernel_element(b, 3));
  std::vector<int> perm = {4, 1, 3, 2};
  MapFamily moved = fam.permuted(perm);
  CHECK(residual_is_zero(moved, 4));
  // relabeling the kernel parameters the same way gives the same family
  std::map<FaceVariable, Rational> moved_b;
  for (const auto& [f, v] : b)
    moved_b[FaceVariable(perm[f.i - 1], perm[f.j - 1])] = v;
  CHECK(moved ==
        latmap::family_sum(expand_darboux(4), kernel_element(moved_b, 3)));
}

TEST_CASE("residual report serializes its verdict") {
  MapFamily quad = expand_darboux(2).with_order(4);
  auto doc = latmap::residual_report_to_json(second_stage_residual(quad, 4), 4);
  CHECK(doc["max_degree"] == 4);
  CHECK(doc["consistent"] == false);
  CHECK(doc["first_failure"]["degree"] == 4);
  CHECK(doc["equations"].size() == 6);
  CHECK(doc["equations"][0]["nonzero_degrees"].size() == 1);
  auto ok = latmap::residual_report_to_json(
      second_stage_residual(expand_darboux(4), 4), 4);
  CHECK(ok["consistent"] == true);
  CHECK(ok["first_failure"].is_null());
}
