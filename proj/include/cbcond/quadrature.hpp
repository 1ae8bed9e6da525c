#pragma once

// Thin wrappers over Boost.Math quadrature with the tolerances used across
// the library. All routines return the integral and optionally an error
// estimate; they throw NumericalError on non-finite results.

#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <string>
#include <type_traits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cbcond/errors.hpp"

namespace cbcond::quad {

inline constexpr double kDefaultRelTol = 1e-12;

namespace detail {

template <class T>
bool finite_value(const T& v) {
  if constexpr (std::is_same_v<T, std::complex<double>>) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  } else {
    return std::isfinite(v);
  }
}

template <class T>
T check(const T& v, const char* what) {
  if (!finite_value(v)) {
    throw NumericalError(std::string("quadrature produced a non-finite value (") + what + ")");
  }
  return v;
}

template <class Call>
auto guarded(Call&& call, const char* what) {
  try {
    return call();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalError(std::string(what) + ": " + e.what());
  }
}

}  // namespace detail

// Adaptive Gauss-Kronrod (G15/K31) on a finite interval. Suitable for smooth
// integrands, including complex-valued ones. The interval is mapped onto
// [-1, 1] first: Boost compares unscaled local errors against a scaled
// tolerance, which never converges on very narrow intervals.
template <class F>
auto gauss_kronrod(F&& f, double a, double b, double rel_tol = kDefaultRelTol,
                   double* err = nullptr, unsigned max_depth = 18) {
  double e = 0.0;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto g = [&](double u) { return f(mid + half * u); };
  auto v = detail::guarded(
      [&] {
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, -1.0, 1.0,
                                                                              max_depth, rel_tol, &e);
      },
      "gauss_kronrod");
  v *= half;
  e *= std::abs(half);
  if (err) *err = e;
  return detail::check(v, "gauss_kronrod");
}

// Double-exponential rule on a finite interval; tolerates integrable
// endpoint singularities. The integrand is never evaluated at a or b.
template <class F>
double tanh_sinh(F&& f, double a, double b, double rel_tol = kDefaultRelTol,
                 double* err = nullptr) {
  static thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
  double e = 0.0;
  double l1 = 0.0;
  double v = detail::guarded([&] { return rule.integrate(f, a, b, rel_tol, &e, &l1); },
                             "tanh_sinh");
  if (err) *err = e;
  return detail::check(v, "tanh_sinh");
}

// Double-exponential rule on [a, +inf).
template <class F>
double exp_sinh(F&& f, double a, double rel_tol = kDefaultRelTol, double* err = nullptr) {
  static thread_local boost::math::quadrature::exp_sinh<double> rule(9);
  double e = 0.0;
  double l1 = 0.0;
  double v = detail::guarded(
      [&] {
        return rule.integrate(f, a, std::numeric_limits<double>::infinity(), rel_tol, &e, &l1);
      },
      "exp_sinh");
  if (err) *err = e;
  return detail::check(v, "exp_sinh");
}

}  // namespace cbcond::quad
