#pragma once

// Numerical Laplace inversion by the Fourier-series method with Euler
// summation (Abate-Whitt). Only evaluates the transform on the vertical
// line Re s = A / (2x) > 0.

#include <complex>
#include <functional>

namespace cbcond {

struct EulerParams {
  double A = 25.0;       // discretization error ~ exp(-A)
  int terms = 30;        // n: partial sums before averaging
  int euler_terms = 15;  // m: binomial averaging depth
};

struct InversionResult {
  double value = 0.0;
  // |E(n, m) - E(n + 1, m)|, a convergence indicator.
  double delta = 0.0;
};

InversionResult invert_laplace(const std::function<std::complex<double>(std::complex<double>)>& F,
                               double x, const EulerParams& p = {});

}  // namespace cbcond
