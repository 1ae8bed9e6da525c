#include <doctest.h>

#include <cmath>
#include <random>

#include "cbcond/rng.hpp"
#include "cbcond/stats.hpp"

using namespace cbcond;

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(7, 3);
  Rng b(7, 3);
  Rng c(7, 4);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  CHECK(a() != c());
  Rng u(1, 0);
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
}

TEST_CASE("mean and weighted mean") {
  const auto e = mean_estimate({1.0, 2.0, 3.0, 4.0});
  CHECK(e.mean == doctest::Approx(2.5));
  CHECK(e.half_width == doctest::Approx(kZ95 * std::sqrt(5.0 / 3.0 / 4.0)));
  const auto w = weighted_mean({1.0, 3.0}, {3.0, 1.0});
  CHECK(w.mean == doctest::Approx(1.5));
  CHECK(effective_sample_size({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(4.0));
  CHECK(effective_sample_size({1.0, 0.0, 0.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("KS distances") {
  std::vector<double> x;
  for (int i = 1; i <= 100; ++i) x.push_back((i - 0.5) / 100.0);
  CHECK(ks_distance(x, [](double v) { return v; }) == doctest::Approx(0.005));
  std::vector<double> w(x.size(), 2.0);
  CHECK(ks_distance_weighted(x, w, [](double v) { return v; }) == doctest::Approx(0.005));
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0));
  CHECK(ks_two_sample({1, 2}, {3, 4}) == doctest::Approx(1.0));
  CHECK(ks_two_sample({1, 1, 2}, {1, 2, 2}) == doctest::Approx(1.0 / 3.0));
}
