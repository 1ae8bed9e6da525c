#pragma once

#include <cmath>
#include <functional>

#include "cbcond/quadrature.hpp"

namespace cbcond {

template <class G>
double LevyMeasure::integrate(G&& g, double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  if (const auto* p = power_law_params()) {
    const double c = p->c;
    const double a = p->a;
    return quad::tanh_sinh(
        [&](double r) {
          const double v = g(r);
          if (v == 0.0) return 0.0;
          const double mag = std::exp(std::log(std::abs(v)) - (1.0 + a) * std::log(r));
          return std::copysign(c * mag, v);
        },
        lo, hi, 1e-10);
  }
  if (table()) {
    return integrate_cells(std::function<double(double)>(g), lo, hi);
  }
  return 0.0;
}

}  // namespace cbcond
