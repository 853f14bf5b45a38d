#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "innerdyn/clark.hpp"
#include "innerdyn/errors.hpp"
#include "innerdyn/inner_function.hpp"
#include "innerdyn/rng.hpp"

using namespace innerdyn;

namespace {

AtomicMeasure make_measure(std::initializer_list<std::pair<double, double>> atoms) {
  AtomicMeasure pi;
  for (const auto& [t, mass] : atoms) pi.atoms.push_back({CirclePoint(t), mass});
  return pi;
}

const AtomicMeasure quarter_pair = make_measure({{0.25, 0.5}, {0.75, 0.5}});

}  // namespace

TEST_CASE("atomic measures reject malformed data") {
  CHECK_THROWS_AS(AtomicMeasure{}.validate(), precondition_error);
  CHECK_THROWS_AS(make_measure({{0.2, 0.5}, {0.6, -0.5}}).validate(), precondition_error);
  CHECK_THROWS_AS(make_measure({{0.2, 0.5}, {0.6, 0.4}}).validate(), precondition_error);
  CHECK_THROWS_AS(make_measure({{0.2, 0.5}, {0.2, 0.5}}).validate(), precondition_error);
  quarter_pair.validate();
}

TEST_CASE("measures survive a json round trip") {
  const AtomicMeasure pi = make_measure({{0.1, 0.25}, {0.45, 0.75}});
  const AtomicMeasure back = measure_from_json(measure_to_json(pi));
  REQUIRE(back.atoms.size() == 2);
  CHECK(back.atoms[0].location.t == pi.atoms[0].location.t);
  CHECK(back.atoms[1].mass == pi.atoms[1].mass);

  CHECK_THROWS_WITH_AS(measure_from_json("{"), doctest::Contains("measure json"),
                       precondition_error);
  CHECK_THROWS_AS(measure_from_json("{\"atoms\": 3}"), precondition_error);
  CHECK_THROWS_AS(measure_from_json("{\"atoms\": [{\"t\": 0.5}]}"), precondition_error);
}

TEST_CASE("the herglotz transform is normalized and has positive real part") {
  CHECK(std::abs(herglotz_F(quarter_pair, Complex(0.0, 0.0)) - Complex(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(herglotz_F(quarter_pair, Complex(0.3, 0.0)) -
                 Complex(0.8348623853211009, 0.0)) < 1e-12);
  for (const Complex z : {Complex(0.5, 0.3), Complex(-0.2, 0.6), Complex(0.0, -0.8)}) {
    CHECK(herglotz_F(quarter_pair, z).real() > 0.0);
  }
  CHECK_THROWS_AS(herglotz_F(quarter_pair, Complex(1.0, 0.0)), precondition_error);
}

TEST_CASE("the quarter pair builds the negated squaring map") {
  const InnerFunctionSpec spec = inner_from_clark(quarter_pair);
  CHECK(std::abs(spec.rotation - Complex(-1.0, 0.0)) < 1e-10);
  CHECK(spec.atoms.empty());
  CHECK(spec.vanishing_order() == 2);
  const Complex z(0.2, 0.1);
  CHECK(std::abs(eval_disk(spec, z) - (-z * z)) < 1e-10);
}

TEST_CASE("a single atom is rejected as a mobius rotation") {
  CHECK_THROWS_WITH_AS(inner_from_clark(make_measure({{0.25, 1.0}})),
                       doctest::Contains("Mobius"), precondition_error);
}

TEST_CASE("clark measures of constructed maps match the prescribed atoms") {
  CHECK(clark_roundtrip_check(quarter_pair) < 1e-12);
  CHECK(clark_roundtrip_check(make_measure({{0.1, 0.2},
                                            {0.3, 0.2},
                                            {0.5, 0.2},
                                            {0.7, 0.2},
                                            {0.9, 0.2}})) < 1e-8);
  CHECK(clark_roundtrip_check(make_measure({{1.0 / 3.0, 0.7}, {2.0 / 3.0, 0.3}})) < 1e-8);
}

TEST_CASE("random well-separated measures round trip through the construction") {
  const CounterRng rng(derive_key(0x636c61726bULL, 0));
  std::uint64_t counter = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2 + trial % 4;
    AtomicMeasure pi;
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
      const double t = (j + 0.5 * rng.uniform(counter++)) / k;
      const double raw = 1.0 + rng.uniform(counter++);
      pi.atoms.push_back({CirclePoint(t), raw});
      total += raw;
    }
    for (Atom& a : pi.atoms) a.mass /= total;
    pi.validate();
    CHECK(clark_roundtrip_check(pi) < 1e-7);
  }
}

TEST_CASE("angular derivative sums diverge exactly at the singular atom") {
  const AngularDerivativeReport at_atom =
      angular_derivative_check(boole_spec(), CirclePoint(0.0), CirclePoint(0.5));
  CHECK_FALSE(at_atom.finite);
  CHECK(at_atom.growth_ratio > 10.0);
  CHECK(at_atom.value > 0.0);

  const AngularDerivativeReport away =
      angular_derivative_check(boole_spec(), CirclePoint(0.5), CirclePoint(0.1));
  CHECK(away.finite);
  CHECK(away.growth_ratio < 10.0);

  const AngularDerivativeReport finite_map =
      angular_derivative_check(doubling_spec(), CirclePoint(0.3), CirclePoint(0.7));
  CHECK(finite_map.finite);
  CHECK(finite_map.growth_ratio == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(finite_map.value > 0.0);

  CHECK_THROWS_AS(angular_derivative_check(doubling_spec(), CirclePoint(0.3), CirclePoint(0.3)),
                  domain_error);
}
