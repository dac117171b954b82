#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "helpers.hpp"
#include "latmap/gauge.hpp"

using latmap::BranchMismatch;
using latmap::ComponentKey;
using latmap::FaceVariable;
using latmap::GaugeTransformation;
using latmap::MapFamily;
using latmap::Monomial;
using latmap::NormalFormError;
using latmap::ParseError;
using latmap::Polynomial;
using latmap::Rational;
using latmap::ValidationError;
using latmap::component_keys;
using latmap::compose_gauges;
using latmap::conjugate;
using latmap::enumerate_faces;
using latmap::expand_darboux;
using latmap::face_variable_id;
using latmap::gauge_from_text;
using latmap::gauge_to_json;
using latmap::kernel_element;
using latmap::normal_form;
using testutil::Rng;

namespace {

GaugeTransformation random_gauge(Rng& rng, int max_degree) {
  GaugeTransformation g;
  for (const FaceVariable& f : enumerate_faces(4)) {
    if (rng.chance(60)) g.set_scaling(f, rng.nonzero_rational());
    for (int m = 2; m <= max_degree; ++m)
      if (rng.chance(40)) g.set_point_term(f, m, rng.rational());
  }
  return g;
}

}  // namespace

TEST_CASE("gauge accessors and identity bookkeeping") {
  GaugeTransformation g;
  CHECK(g.is_identity());
  FaceVariable f(1, 2);
  g.set_scaling(f, Rational(2));
  g.set_point_term(f, 3, Rational(1, 2));
  CHECK(!g.is_identity());
  CHECK(g.scaling(f) == 2);
  CHECK(g.scaling(FaceVariable(1, 3)) == 1);
  CHECK(g.point_term(f, 3) == Rational(1, 2));
  CHECK(g.point_term(f, 2) == 0);
  // setting back the neutral values erases the entries
  g.set_scaling(f, 1);
  g.set_point_term(f, 3, 0);
  CHECK(g.is_identity());
  CHECK_THROWS_AS(g.set_scaling(f, 0), std::invalid_argument);
  CHECK_THROWS_AS(g.set_point_term(f, 1, Rational(1)), std::invalid_argument);
}

TEST_CASE("series and inverse series cancel to the identity") {
  Rng rng(71);
  FaceVariable f(2, 4);
  int var = face_variable_id(f, 4);
  for (int trial = 0; trial < 50; ++trial) {
    GaugeTransformation g = random_gauge(rng, 5);
    const int order = 6;
    Polynomial fwd = g.series(f, var, order);
    Polynomial inv = g.inverse_series(f, var, order);
    // g(g^{-1}(u)) = u and g^{-1}(g(u)) = u, both truncated
    CHECK(fwd.substituted({{var, inv}}, order) == Polynomial::variable(var));
    CHECK(inv.substituted({{var, fwd}}, order) == Polynomial::variable(var));
  }
  // the worked inverse of u -> 2(u + u^2): u/2 - u^2/4 + u^3/4 ...
  GaugeTransformation g;
  g.set_scaling(f, 2);
  g.set_point_term(f, 2, 1);
  Polynomial inv = g.inverse_series(f, var, 3);
  Polynomial expected = Rational(1, 2) * Polynomial::variable(var);
  expected.add_term(Monomial::variable(var, 2), Rational(-1, 4));
  expected.add_term(Monomial::variable(var, 3), Rational(1, 4));
  CHECK(inv == expected);
}

TEST_CASE("conjugating by the identity changes nothing") {
  Rng rng(72);
  MapFamily fam = testutil::random_darboux_headed_family(rng, 5);
  CHECK(conjugate(fam, GaugeTransformation()) == fam);
}

TEST_CASE("conjugation is a right group action") {
  Rng rng(73);
  for (int trial = 0; trial < 8; ++trial) {
    MapFamily fam = testutil::random_darboux_headed_family(rng, 4);
    GaugeTransformation g1 = random_gauge(rng, 3);
    GaugeTransformation g2 = random_gauge(rng, 3);
    // (T^g1)^g2 applies g1 first in the conjugation sense, so the combined
    // gauge is g1 o g2
    MapFamily lhs = conjugate(conjugate(fam, g1), g2);
    MapFamily rhs = conjugate(fam, compose_gauges(g1, g2, fam.order()));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("uniform scaling rescales the quadratic term") {
  // with every face scaled by the same c, substituting and undoing one power
  // of c leaves A^(2) multiplied by c
  MapFamily fam = expand_darboux(3);
  GaugeTransformation g;
  for (const FaceVariable& f : enumerate_faces(4)) g.set_scaling(f, 3);
  MapFamily scaled = conjugate(fam, g);
  for (const ComponentKey& key : component_keys(4)) {
    CHECK(scaled.term(key, 2) == Rational(3) * fam.term(key, 2));
    CHECK(scaled.term(key, 3) == Rational(9) * fam.term(key, 3));
  }
}

TEST_CASE("point gauges shift exactly by the kernel families") {
  // conjugating by x -> x + b x^m leaves degrees <= m alone and subtracts
  // the kernel family of the parameters b from degree m+1
  Rng rng(74);
  for (int m : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      MapFamily fam = testutil::random_darboux_headed_family(rng, m + 1);
      std::map<FaceVariable, Rational> b;
      GaugeTransformation g;
      for (const FaceVariable& f : enumerate_faces(4))
        if (rng.chance(70)) {
          b[f] = rng.nonzero_rational();
          g.set_point_term(f, m, b[f]);
        }
      MapFamily moved = conjugate(fam, g);
      MapFamily shift = kernel_element(b, m);
      for (const ComponentKey& key : component_keys(4)) {
        for (int d = 2; d <= m; ++d)
          CHECK(moved.term(key, d) == fam.term(key, d));
        CHECK(moved.term(key, m + 1) ==
              fam.term(key, m + 1) - shift.term(key, m + 1));
      }
    }
  }
}

TEST_CASE("kernel families have the published shape") {
  std::map<FaceVariable, Rational> b{{FaceVariable(1, 2), Rational(1)}};
  MapFamily k = kernel_element(b, 2);
  // component (face {1,2}, dir 3): 2 b_12 x_12 x_13 x_23
  ComponentKey on{FaceVariable(1, 2), 3};
  auto s = k.scope_ids(on);
  Polynomial expect_on;
  expect_on.add_term(
      Monomial::from_entries({{s[0], 1}, {s[1], 1}, {s[2], 1}}), 2);
  CHECK(k.term(on, 3) == expect_on);
  // component (face {1,3}, dir 2): -b_12 x_12^2 x_23
  ComponentKey off{FaceVariable(1, 3), 2};
  auto t = k.scope_ids(off);
  Polynomial expect_off;
  expect_off.add_term(Monomial::from_entries({{t[1], 2}, {t[2], 1}}), -1);
  CHECK(k.term(off, 3) == expect_off);
  // a component avoiding face {1,2} entirely is zero
  CHECK(k.term({FaceVariable(3, 4), 1}, 3).is_zero());
  CHECK_THROWS_AS(kernel_element(b, 1), std::invalid_argument);
}

TEST_CASE("normal form leaves the expansion fixed with the identity gauge") {
  MapFamily fam = expand_darboux(5);
  auto [normal, gauge] = normal_form(fam);
  CHECK(normal == fam);
  CHECK(gauge.is_identity());
}

TEST_CASE("normal form undoes planted point gauges") {
  Rng rng(75);
  for (int m : {2, 3, 4}) {
    MapFamily fam = expand_darboux(m + 1);
    std::map<FaceVariable, Rational> b;
    for (const FaceVariable& f : enumerate_faces(4))
      if (rng.chance(80)) b[f] = rng.nonzero_rational();
    MapFamily moved = latmap::family_sum(fam, kernel_element(b, m));
    auto [normal, gauge] = normal_form(moved);
    CHECK(normal == fam);
    // conjugating by a point gauge with parameters b subtracts the kernel
    // family of b, so the recovered gauge carries exactly the planted values
    for (const FaceVariable& f : enumerate_faces(4)) {
      Rational want = b.count(f) ? b.at(f) : Rational(0);
      CHECK(gauge.point_term(f, m) == want);
    }
  }
}

TEST_CASE("normal form requires the unit quadratic head") {
  MapFamily fam = expand_darboux(4);
  ComponentKey key{FaceVariable(1, 2), 3};
  auto s = fam.scope_ids(key);
  Polynomial off;
  off.add_term(Monomial::from_entries({{s[1], 1}, {s[2], 1}}), 2);
  fam.set_term(key, 2, off);
  CHECK_THROWS_AS(normal_form(fam), BranchMismatch);
}

TEST_CASE("normal form reports direction-dependent slices as unreachable") {
  // a slice coefficient present for one shift direction of a face but not
  // the other cannot be produced by any point gauge
  MapFamily fam = expand_darboux(3);
  ComponentKey key{FaceVariable(1, 2), 3};
  auto s = fam.scope_ids(key);
  Polynomial bump = fam.term(key, 3);
  bump.add_term(Monomial::from_entries({{s[0], 1}, {s[1], 1}, {s[2], 1}}), 1);
  fam.set_term(key, 3, bump);
  CHECK_THROWS_AS(normal_form(fam), NormalFormError);
}

TEST_CASE("gauge JSON round trips and rejects bad documents") {
  Rng rng(76);
  for (int trial = 0; trial < 30; ++trial) {
    GaugeTransformation g = random_gauge(rng, 4);
    GaugeTransformation back = gauge_from_text(gauge_to_json(g).dump());
    CHECK(back == g);
  }
  // canonical example
  GaugeTransformation g = gauge_from_text(
      R"({"scalings": {"12": "2"}, "point": {"34": {"3": "-1/2"}}})");
  CHECK(g.scaling(FaceVariable(1, 2)) == 2);
  CHECK(g.point_term(FaceVariable(3, 4), 3) == Rational(-1, 2));
  // rejects
  CHECK_THROWS_AS(gauge_from_text("["), ParseError);
  CHECK_THROWS_AS(gauge_from_text(R"({"scalings": {"12": "0"}})"),
                  ValidationError);
  CHECK_THROWS_AS(gauge_from_text(R"({"scalings": {"11": "1"}})"),
                  ValidationError);
  CHECK_THROWS_AS(gauge_from_text(R"({"scalings": {"1" : "1"}})"),
                  ValidationError);
  CHECK_THROWS_AS(gauge_from_text(R"({"point": {"12": {"1": "1"}}})"),
                  ValidationError);
  CHECK_THROWS_AS(gauge_from_text(R"({"point": {"12": {"x": "1"}}})"),
                  ParseError);
  CHECK_THROWS_AS(gauge_from_text(R"({"point": {"12": {"2": 5}}})"),
                  ParseError);
  CHECK_THROWS_AS(gauge_from_text(R"({"other": {}})"), ValidationError);
}

TEST_CASE("conjugation validates gauge faces against the dimension") {
  MapFamily fam(4, 2);
  GaugeTransformation g;
  g.set_scaling(FaceVariable(1, 5), 2);
  CHECK_THROWS_AS(conjugate(fam, g), ValidationError);
}

TEST_CASE("composition matches series substitution") {
  Rng rng(77);
  FaceVariable f(1, 3);
  for (int trial = 0; trial < 40; ++trial) {
    GaugeTransformation a = random_gauge(rng, 4);
    GaugeTransformation b = random_gauge(rng, 4);
    const int order = 5;
    GaugeTransformation c = compose_gauges(a, b, order);
    Polynomial direct = a.series(f, 0, order).substituted(
        {{0, b.series(f, 0, order)}}, order);
    CHECK(c.series(f, 0, order) == direct);
  }
}
