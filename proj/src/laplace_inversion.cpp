#include "cbcond/laplace_inversion.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "cbcond/errors.hpp"

namespace cbcond {

InversionResult invert_laplace(const std::function<std::complex<double>(std::complex<double>)>& F,
                               double x, const EulerParams& p) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("Laplace inversion needs x > 0");
  if (p.terms < 1 || p.euler_terms < 1 || !(p.A > 0.0)) {
    throw ConfigError("Laplace inversion: A, terms and euler_terms must be positive");
  }
  const int n = p.terms;
  const int m = p.euler_terms;
  const double re = p.A / (2.0 * x);
  const double step = std::numbers::pi / x;
  const double scale = std::exp(p.A / 2.0) / x;

  // Partial sums S_0 .. S_{n+m+1}.
  std::vector<double> partial(static_cast<std::size_t>(n + m + 2));
  double sum = 0.5 * F({re, 0.0}).real();
  partial[0] = sum;
  for (int k = 1; k < n + m + 2; ++k) {
    const double term = F({re, step * k}).real();
    sum += (k % 2 == 0) ? term : -term;
    partial[static_cast<std::size_t>(k)] = sum;
  }

  auto euler = [&](int start) {
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= m; ++j) {
      acc += binom * partial[static_cast<std::size_t>(start + j)];
      binom = binom * (m - j) / (j + 1);
    }
    return acc * std::ldexp(1.0, -m);
  };
  const double e0 = scale * euler(n);
  const double e1 = scale * euler(n + 1);
  if (!std::isfinite(e0) || !std::isfinite(e1)) {
    throw NumericalError("Laplace inversion produced a non-finite value at x = " +
                         std::to_string(x) + " (A = " + std::to_string(p.A) + ")");
  }
  return {e0, std::abs(e0 - e1)};
}

}  // namespace cbcond
