#include <doctest.h>

#include <cmath>

#include "cbcond/errors.hpp"
#include "cbcond/quadrature.hpp"
#include "cbcond/scale.hpp"
#include "fixtures.hpp"

using namespace cbcond;
using fixtures::rel;

TEST_CASE("W for l + l^2 by inversion") {
  const ScaleFunction sf(ExtinctionKernel(fixtures::lpq_triplet()));
  CHECK_FALSE(sf.uses_closed_form());
  for (double x : {1e-9, 1e-4, 0.5, 1.0, 4.0, 12.0}) {
    CHECK(rel(sf.W(x), -std::expm1(-x)) < 1e-9);
    CHECK(std::abs(sf.W_prime(x) - std::exp(-x)) < 1e-10);
  }
  CHECK(sf.W(0.0) == 0.0);
  CHECK(sf.W(-1.0) == 0.0);
}

TEST_CASE("W for the stable triplet") {
  const ScaleFunction sf(ExtinctionKernel(fixtures::stable15_triplet()));
  const double g = std::tgamma(1.5);
  for (double x : {1e-8, 0.5, 1.0, 4.0}) {
    CHECK(rel(sf.W(x), std::sqrt(x) / g) < 5e-9);
    CHECK(rel(sf.W_prime(x), 0.5 / (std::sqrt(x) * g)) < 1e-8);
  }
}

TEST_CASE("W for the mixed mechanism against frozen values") {
  const ScaleFunction sf(ExtinctionKernel(fixtures::mixed()));
  namespace r = fixtures::mixed_ref;
  CHECK(rel(sf.W(0.5), r::W05) < 1e-9);
  CHECK(rel(sf.W(1.0), r::W1) < 1e-9);
  CHECK(rel(sf.W(3.0), r::W3) < 1e-9);
  CHECK(rel(sf.W_prime(0.5), r::Wp05) < 1e-8);
  CHECK(rel(sf.W_prime(1.0), r::Wp1) < 1e-8);
  CHECK(rel(sf.W_prime(3.0), r::Wp3) < 1e-8);
  CHECK(rel(*sf.potential_mass(1.0), r::mass1) < 1e-8);
}

TEST_CASE("closed form is used only when asked") {
  InversionConfig cfg;
  cfg.prefer_closed_form = true;
  const ScaleFunction sf(ExtinctionKernel(BranchingMechanism::from_closed_form(ClosedForm::stable(1.5))), cfg);
  CHECK(sf.uses_closed_form());
  CHECK(rel(sf.W(4.0), 2.0 / std::tgamma(1.5)) < 1e-14);
  CHECK(rel(sf.W_inverted(4.0), sf.W(4.0)) < 1e-9);
}

TEST_CASE("Laplace round trip") {
  const ScaleFunction sf(ExtinctionKernel(fixtures::mixed()));
  for (double l : {0.5, 2.0, 10.0}) {
    const double v = quad::exp_sinh([&](double x) { return std::exp(-l * x) * sf.W(x); }, 0.0, 1e-10);
    CHECK(std::abs(v * sf.mechanism().psi(l) - 1.0) < 1e-8);
  }
}

TEST_CASE("potential measure") {
  const ScaleFunction sf(ExtinctionKernel(fixtures::lpq_triplet()));
  // (W(y) - W(y - x)) / y with W = 1 - e^-y.
  CHECK(rel(sf.potential_density(1.0, 0.5), -std::expm1(-0.5) / 0.5) < 1e-9);
  CHECK(rel(sf.potential_density(1.0, 2.0), (std::exp(-1.0) - std::exp(-2.0)) / 2.0) < 1e-8);
  CHECK(rel(*sf.potential_mass(1.0), 1.1735630272247269) < 1e-9);
  const ScaleFunction q(ExtinctionKernel(fixtures::quadratic_triplet()));
  CHECK_FALSE(q.potential_mass(1.0).has_value());
  for (double l : {1.0, 2.0}) {
    CHECK(std::abs(sf.potential_laplace(50.0, l) - std::log1p(1.0 / l)) < 1e-8);
    CHECK(std::abs(q.potential_laplace(50.0, l) - 1.0 / l) < 1e-8);
  }
}

TEST_CASE("stationary density") {
  const ScaleFunction sf(ExtinctionKernel(fixtures::quadratic_triplet()));
  for (double x : {0.1, 1.0, 3.0}) CHECK(sf.stationary_density(x) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("too few inversion terms is reported") {
  InversionConfig cfg;
  cfg.euler.terms = 1;
  cfg.euler.euler_terms = 1;
  cfg.max_delta = 1e-12;
  cfg.abs_floor = 0.0;
  CHECK_THROWS_AS(ScaleFunction(ExtinctionKernel(fixtures::mixed()), cfg).W(1.0), NumericalError);
}
