#include <doctest.h>

#include <cmath>

#include "cbcond/errors.hpp"
#include "cbcond/laws.hpp"
#include "cbcond/quadrature.hpp"
#include "cbcond/scale.hpp"
#include "fixtures.hpp"

using namespace cbcond;
using fixtures::rel;

namespace {

const std::vector<double> kGrid{0.25, 0.5, 1.0, 2.0, 4.0};

// Gamma(shape k, rate r) transform.
double gamma_lt(double k, double r, double l) { return std::pow(r / (r + l), k); }

}  // namespace

TEST_CASE("QSD and Yaglom for l + l^2") {
  const ExtinctionKernel k(fixtures::lpq_triplet());
  CHECK(qsd_lt(k, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(qsd_lt(k, 0.5, 1.0) == doctest::Approx(1.0 - std::sqrt(0.5)).epsilon(1e-10));
  for (double l : {0.5, 1.0, 2.0}) CHECK(rel(yaglom_lt(k, l), 1.0 / (1.0 + l)) < 1e-10);
  CHECK(yaglom_mean(k).value() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(qsd_lt(k, 1.5, 1.0), DomainError);
  CHECK(completely_monotone_on([&](double l) { return qsd_lt(k, 0.5, l); }, kGrid));
}

TEST_CASE("QSD is undefined in the critical case") {
  const ExtinctionKernel k(fixtures::quadratic_triplet());
  CHECK_THROWS_AS(yaglom_lt(k, 1.0), DomainError);
  CHECK_THROWS_AS(vinf_lt(k, 1.0), DomainError);
}

TEST_CASE("stationary window laws") {
  const ScaleFunction sf(ExtinctionKernel(fixtures::quadratic_triplet()));
  const auto& k = sf.kernel();
  // psi = l^2: mu_s(dx) = e^{-x/s} dx / s, W_s = Exp(1/s).
  CHECK(mu_s_density(sf, 1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(mu_s_lt(k, 1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
  for (double s : {0.5, 1.0, 3.0}) {
    CHECK(rel(ws_lt(k, s, 1.0), 1.0 / (1.0 + s)) < 1e-10);
    CHECK(rel(ws_mean(k, s), s) < 1e-8);
  }
}

TEST_CASE("V_q closed form and integral form") {
  const ExtinctionKernel lpq(fixtures::lpq_triplet());
  const double q = fixtures::kLn2;
  // varphi(ln 2) = 1: V_q = Gamma(2, 2).
  for (double l : {0.5, 1.0, 2.0}) {
    CHECK(rel(vq_lt(lpq, q, l), gamma_lt(2.0, 2.0, l)) < 1e-10);
    CHECK(std::abs(vq_laplace_exponent(lpq, q, l) - vq_laplace_exponent_integral(lpq, q, l)) < 1e-10);
  }
  CHECK(vq_laplace_exponent(lpq, q, 2.0) == doctest::Approx(2.0 * fixtures::kLn2).epsilon(1e-10));
  const ExtinctionKernel mixed(fixtures::mixed());
  for (double qq : {0.3, 2.0}) {
    for (double l : {0.2, 3.0}) {
      CHECK(std::abs(vq_laplace_exponent(mixed, qq, l) - vq_laplace_exponent_integral(mixed, qq, l)) < 1e-8);
    }
  }
}

TEST_CASE("V_q Levy density and Frullani identity") {
  const ScaleFunction sf(ExtinctionKernel(fixtures::quadratic_triplet()));
  // psi = l^2, q = 1: v_q(x) = 2 e^{-x}.
  CHECK(vq_levy_density(sf, 1.0, 1.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-8));
  const ScaleFunction mx(ExtinctionKernel(fixtures::mixed()));
  const double q = 1.0;
  const double l = 1.5;
  auto f = [&](double x) { return -std::expm1(-l * x) * vq_levy_density(mx, q, x) / x; };
  const double lhs = quad::tanh_sinh(f, 0.0, 1.0, 1e-8) + quad::tanh_sinh(f, 1.0, 60.0, 1e-8);
  CHECK(std::abs(lhs - vq_laplace_exponent(mx.kernel(), q, l)) < 1e-6);
}

TEST_CASE("size-biasing identities") {
  const ScaleFunction sf(ExtinctionKernel(fixtures::mixed()));
  const auto& k = sf.kernel();
  for (double q : {0.5, 2.0}) CHECK(size_bias_residual(vq_law(sf, q), ws_law(k, q), kGrid) < 1e-6);
  CHECK(size_bias_residual(vinf_law(k), yaglom_law(k), kGrid) < 1e-6);
}

TEST_CASE("V_inf") {
  const ExtinctionKernel k(fixtures::lpq_triplet());
  CHECK(vinf_exists(k.mechanism()));
  CHECK(vinf_lt(k, 1.0) == doctest::Approx(0.25).epsilon(1e-9));
  for (double l : {1e-5, 1e-3, 0.5, 4.0}) {
    CHECK(rel(vinf_lt(k, l), gamma_lt(2.0, 1.0, l)) < 1e-8);
    CHECK(std::abs(vinf_laplace_exponent(k, l) - vinf_laplace_exponent_integral(k, l)) < 1e-8);
  }
}

TEST_CASE("reverse-path limit") {
  const ExtinctionKernel q(fixtures::quadratic_triplet());
  const ExtinctionKernel lpq(fixtures::lpq_triplet());
  CHECK(rel(reverse_limit_lt(q, 1.0, 1.0), vq_lt(q, 1.0, 1.0)) < 1e-12);
  CHECK(reverse_limit_lt(lpq, fixtures::kLn2, 2.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
}

TEST_CASE("transition limits") {
  const ExtinctionKernel q(fixtures::quadratic_triplet());
  CHECK(std::abs(normalized_transition_transform(q, 1.0, 1e4, 1.0) - 1.0) < 2e-4);
  CHECK(normalized_transition_limit(q, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  const ExtinctionKernel lpq(fixtures::lpq_triplet());
  CHECK(normalized_transition_limit(lpq, 1.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(normalized_transition_transform(lpq, 1.0, 30.0, 1.0) - 0.5) < 1e-4);
  CHECK(std::abs(rescaled_conditional_transform(q, 1.0, 1e4, 1.0) - 0.5) < 1e-3);
}

TEST_CASE("law kind names round trip") {
  for (auto kind : {LawKind::QSD, LawKind::Yaglom, LawKind::MuS, LawKind::Ws, LawKind::Vq, LawKind::Vinf}) {
    CHECK(parse_law_kind(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(parse_law_kind("nope"), ConfigError);
}
