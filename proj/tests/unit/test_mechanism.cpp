#include <doctest.h>

#include <cmath>

#include "cbcond/config.hpp"
#include "cbcond/errors.hpp"
#include "cbcond/mechanism.hpp"
#include "fixtures.hpp"

using namespace cbcond;
using fixtures::rel;

TEST_CASE("psi of the closed-form families") {
  const auto q = BranchingMechanism::from_closed_form(ClosedForm::quadratic());
  CHECK(q.psi(3.0) == doctest::Approx(9.0).epsilon(1e-14));
  const auto l = BranchingMechanism::from_closed_form(ClosedForm::linear_plus_quadratic());
  CHECK(l.psi(2.0) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(l.psi_prime(2.0) == doctest::Approx(5.0).epsilon(1e-14));
  const auto s = BranchingMechanism::from_closed_form(ClosedForm::stable(1.5));
  CHECK(s.psi(4.0) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(s.psi_prime(1.0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("stable triplet matches l^beta") {
  const auto m = fixtures::stable15_triplet();
  for (double l : {1e-3, 0.1, 1.0, 7.0, 1e3}) {
    CHECK(rel(m.psi(l), std::pow(l, 1.5)) < 1e-9);
    CHECK(rel(m.psi_prime(l), 1.5 * std::sqrt(l)) < 1e-9);
  }
  const cdouble z(2.0, 3.0);
  const cdouble expect = std::pow(z, 1.5);
  CHECK(std::abs(m.psi(z) - expect) / std::abs(expect) < 1e-9);
}

TEST_CASE("mixed mechanism against frozen values") {
  const auto m = fixtures::mixed();
  CHECK(rel(m.psi(2.0), fixtures::mixed_ref::psi2) < 1e-10);
  CHECK(rel(m.psi_prime(2.0), fixtures::mixed_ref::psi_prime2) < 1e-10);
  CHECK(m.psi_over_lambda(0.0) == doctest::Approx(0.7));
  CHECK(rel(m.psi_prime_minus_alpha(2.0), fixtures::mixed_ref::psi_prime2 - 0.7) < 1e-10);
}

TEST_CASE("closed form and triplet agree") {
  for (auto cf : {ClosedForm::quadratic(), ClosedForm::linear_plus_quadratic()}) {
    const auto m = BranchingMechanism::from_closed_form(cf);
    for (double l : {0.01, 1.0, 50.0}) CHECK(rel(m.psi_triplet(l), m.psi(l)) < 1e-14);
  }
}

TEST_CASE("tabulated density approximates the power law") {
  std::vector<double> r;
  std::vector<double> d;
  for (int i = 0; i <= 400; ++i) {
    const double x = 1e-4 * std::pow(1e8, i / 400.0);
    r.push_back(x);
    d.push_back(std::pow(x, -2.5));
  }
  const BranchingMechanism tab(0.0, 0.0, LevyMeasure::tabulated(r, d, 1.5));
  const BranchingMechanism pl(0.0, 0.0, LevyMeasure::power_law(1.0, 1.5));
  // The table has no mass below 1e-4, which costs about l^2 * 1e-2 in psi.
  for (double l : {0.1, 1.0, 10.0}) CHECK(rel(tab.psi(l), pl.psi(l)) < 2e-2);
  CHECK(rel(tab.levy().tail(2.0), pl.levy().tail(2.0)) < 2e-3);
  CHECK(classify(tab).potential_finite);
  CHECK_FALSE(classify(tab).grey_holds);
}

TEST_CASE("classification truth table") {
  const auto lpq = classify(BranchingMechanism::from_closed_form(ClosedForm::linear_plus_quadratic()));
  CHECK(lpq.criticality == Criticality::Subcritical);
  CHECK(lpq.grey_holds);
  CHECK(lpq.potential_finite);
  CHECK(lpq.xlogx_holds);
  CHECK(lpq.grey_integral == doctest::Approx(fixtures::kLn2).epsilon(1e-9));

  const auto q = classify(BranchingMechanism::from_closed_form(ClosedForm::quadratic()));
  CHECK(q.criticality == Criticality::Critical);
  CHECK(q.grey_holds);
  CHECK_FALSE(q.potential_finite);
  CHECK(std::isinf(q.potential_integral));

  // pi(dr) = r^-2.5 dr: critical, zeta-mean finite.
  const auto st = classify(BranchingMechanism(0.0, 0.0, LevyMeasure::power_law(1.0, 1.5)));
  CHECK(st.criticality == Criticality::Critical);
  CHECK(st.potential_finite);

  const auto mx = classify(fixtures::mixed());
  CHECK(rel(mx.potential_integral, fixtures::mixed_ref::potential_integral) < 1e-8);
  CHECK(rel(mx.grey_integral, fixtures::mixed_ref::phi1) < 1e-8);
  CHECK(rel(mx.xlogx_integral, fixtures::mixed_ref::xlogx) < 1e-8);
  CHECK(mx.xlogx_holds);
}

TEST_CASE("unknown tail cannot be classified") {
  const BranchingMechanism m(0.5, 1.0, LevyMeasure::tabulated({1.0, 2.0}, {1.0, 1.0}, std::nullopt));
  CHECK_THROWS_AS(classify(m), NumericalError);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(mechanism_from_text(R"({"alpha": -1, "sigma2": 1})"), ConfigError);
  CHECK_THROWS_AS(mechanism_from_text(R"({"alpha": 0, "sigma2": 0})"), ConfigError);
  CHECK_THROWS_AS(mechanism_from_text(R"({"alpha": 0, "sigma2": 1, "extra": 2})"), ConfigError);
  CHECK_THROWS_AS(mechanism_from_text(R"({"alpha": 0, "sigma2": 1,)"), ConfigError);
  CHECK_THROWS_AS(
      mechanism_from_text(R"({"alpha": 0, "sigma2": 0, "levy": {"kind": "power_law", "c": 1, "a": 0.5}})"),
      ConfigError);
  const auto m = mechanism_from_text(R"({"alpha": 1, "sigma2": 2, "closed_form": "linear_plus_quadratic"})");
  CHECK(m.closed_form().has_value());
  const auto back = mechanism_from_json(mechanism_to_json(fixtures::mixed()));
  CHECK(back.psi(2.0) == doctest::Approx(fixtures::mixed().psi(2.0)).epsilon(1e-15));
}

TEST_CASE("jump sampler reproduces the tail") {
  const LevyMeasure pl = LevyMeasure::power_law(1.0, 1.5);
  const JumpSampler js(pl, 0.01);
  CHECK(js.rate() == doctest::Approx(pl.tail(0.01)).epsilon(1e-10));
  // P(J > r) = pi_bar(r) / pi_bar(eps) so the median sits where that ratio is 1/2.
  const double med = js.sample(0.5);
  CHECK(pl.tail(med) / pl.tail(0.01) == doctest::Approx(0.5).epsilon(1e-8));
}
