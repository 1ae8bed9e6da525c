#pragma once

// Scale function W of a CB process (the Laplace transform of W is 1/psi),
// with the stationary density W(x)/x and the potential density
// g(x, y) = (W(y) - W(y - x)) / y.

#include <optional>

#include "cbcond/extinction.hpp"
#include "cbcond/laplace_inversion.hpp"
#include "cbcond/reference.hpp"

namespace cbcond {

struct InversionConfig {
  EulerParams euler;
  // Below this point W and W' follow A y^p + B y^(p+d), y = x / crossover,
  // with A and B matching W and W' at the crossover.
  double crossover = 1e-7;
  // Use the registry formulas for W and W' when the mechanism has a
  // closed form.
  bool prefer_closed_form = false;
  // Relative convergence indicator above which inversion reports failure.
  double max_delta = 1e-4;
  // Absolute allowance added to the check; the discretization error of the
  // inversion is of order exp(-A) times the size of the inverted function.
  double abs_floor = 1e-11;
};

class ScaleFunction {
 public:
  explicit ScaleFunction(ExtinctionKernel kernel, InversionConfig cfg = {});

  const ExtinctionKernel& kernel() const { return kernel_; }
  const BranchingMechanism& mechanism() const { return kernel_.mechanism(); }
  const InversionConfig& config() const { return cfg_; }
  bool uses_closed_form() const { return closed_.has_value(); }

  double W(double x) const;
  double W_prime(double x) const;
  double stationary_density(double x) const;
  double potential_density(double x, double y) const;
  // E_x[zeta] = int G(x, dy); nullopt when infinite.
  std::optional<double> potential_mass(double x) const;

  // int_0^inf exp(-l y) g(x, y) dy; tends to phi(l) as x -> inf.
  double potential_laplace(double x, double lambda) const;

  // Raw inversions without the near-zero treatment or closed forms.
  double W_inverted(double x) const;
  double W_prime_inverted(double x) const;

 private:
  ExtinctionKernel kernel_;
  InversionConfig cfg_;
  std::optional<OracleFamily> closed_;
  bool potential_finite_ = false;
  double p0_ = 1.0;
  // Below the crossover x0: W(x) = A y^p + B y^(p + delta), y = x / x0,
  // matched to the inverted W and W' at x0.
  double blend_a_ = 0.0;
  double blend_b_ = 0.0;
  double delta_ = 1.0;
};

}  // namespace cbcond
