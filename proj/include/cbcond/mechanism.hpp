#pragma once

// Branching mechanisms of critical and subcritical CB processes:
//
//   psi(l) = alpha*l + sigma2/2 * l^2 + int_0^inf (exp(-l r) - 1 + l r) pi(dr)
//
// together with the integral tests that classify them.

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cbcond {

using cdouble = std::complex<double>;

// pi(dr) = c * r^(-(1+a)) dr on (0, inf), a in (1, 2).
struct PowerLawDensity {
  double c = 1.0;
  double a = 1.5;
};

// Piecewise-linear density on [r.front(), r.back()], zero below r.front().
// Beyond r.back() the density continues as d_last * (r / r_last)^(-(1+tail)).
// A missing tail exponent means the tail is unknown: evaluations use the
// truncated table and classification refuses to decide.
struct TabulatedDensity {
  std::vector<double> r;
  std::vector<double> density;
  std::optional<double> tail_exponent;
};

class LevyMeasure {
 public:
  enum class Kind { None, PowerLaw, Tabulated };

  LevyMeasure() = default;
  static LevyMeasure none() { return {}; }
  static LevyMeasure power_law(double c, double a);
  static LevyMeasure tabulated(std::vector<double> r, std::vector<double> density,
                               std::optional<double> tail_exponent);

  Kind kind() const;
  bool is_none() const { return kind() == Kind::None; }
  const PowerLawDensity* power_law_params() const { return std::get_if<PowerLawDensity>(&rep_); }
  const TabulatedDensity* table() const { return std::get_if<TabulatedDensity>(&rep_); }

  // Density of pi at r (0 for kind none).
  double density(double r) const;

  // int (exp(-l r) - 1 + l r) pi(dr), real l >= 0 and complex Re z > 0.
  double compensated(double lambda) const;
  cdouble compensated(cdouble z) const;
  // compensated(l) / l, with the l -> 0 and l -> inf limits.
  double compensated_over_lambda(double lambda) const;
  // int (1 - exp(-l r)) r pi(dr) = d/dl compensated(l).
  double damped_first_moment(double lambda) const;

  // pi_bar(r) = pi((r, inf)) and pi_bar_bar(r) = int_r^inf pi_bar(y) dy.
  double tail(double r) const;
  double double_tail(double r) const;

  double mean_above(double eps) const;          // int_eps^inf r pi(dr)
  double second_moment_below(double eps) const;  // int_0^eps r^2 pi(dr)
  double xlogx_integral() const;                 // int_1^inf r ln r pi(dr)

  // int_lo^hi g(r) pi(dr) on a finite range. g may have integrable
  // singularities or kinks at the endpoints.
  template <class G>
  double integrate(G&& g, double lo, double hi) const;

  // Index of regular variation of pi at infinity (pi_bar(r) ~ r^-index);
  // nullopt when unknown. Kind none reports +inf.
  std::optional<double> tail_index() const;

 private:
  std::variant<std::monostate, PowerLawDensity, TabulatedDensity> rep_;
  // Scale-free constants for the power law: K0 = int (e^-s - 1 + s) s^(-1-a) ds
  // and K1 = int (1 - e^-s) s^(-a) ds, both computed by quadrature.
  double k0_ = 0.0;
  double k1_ = 0.0;

  double integrate_cells(const std::function<double(double)>& g, double lo, double hi) const;
  friend class JumpSampler;
};

// Inverse-CDF sampler for jumps of size >= eps under pi.
class JumpSampler {
 public:
  JumpSampler(const LevyMeasure& levy, double eps);
  double rate() const { return rate_; }
  // u uniform on (0, 1).
  double sample(double u) const;

 private:
  const LevyMeasure* levy_;
  double eps_;
  double rate_ = 0.0;
  std::vector<double> nodes_;    // cell boundaries (tabulated)
  std::vector<double> cumulative_;  // cumulative mass at nodes_, from eps
};

struct ClosedForm {
  enum class Kind { Quadratic, Stable, LinearPlusQuadratic };
  Kind kind = Kind::Quadratic;
  double beta = 2.0;  // Stable only, in (1, 2]

  static ClosedForm quadratic() { return {Kind::Quadratic, 2.0}; }
  static ClosedForm stable(double beta) { return {Kind::Stable, beta}; }
  static ClosedForm linear_plus_quadratic() { return {Kind::LinearPlusQuadratic, 2.0}; }
  // Parses "quadratic", "linear_plus_quadratic" and "stable(<beta>)".
  static ClosedForm parse(const std::string& name);
  std::string name() const;
};

class BranchingMechanism {
 public:
  BranchingMechanism(double alpha, double sigma2, LevyMeasure levy,
                     std::optional<ClosedForm> closed_form = std::nullopt, double tol = 1e-10);

  // The (alpha, sigma2, pi) triplet of a registry closed form.
  static BranchingMechanism from_closed_form(const ClosedForm& cf, double tol = 1e-10);

  double alpha() const { return alpha_; }
  double sigma2() const { return sigma2_; }
  const LevyMeasure& levy() const { return levy_; }
  const std::optional<ClosedForm>& closed_form() const { return closed_; }
  double tol() const { return tol_; }
  bool critical() const { return alpha_ == 0.0; }

  double psi(double lambda) const;
  cdouble psi(cdouble z) const;
  double psi_prime(double lambda) const;
  // psi(l) / l, finite and well conditioned for l -> 0 (limit alpha) and
  // l = +inf.
  double psi_over_lambda(double lambda) const;
  // psi'(l) - alpha without cancellation.
  double psi_prime_minus_alpha(double lambda) const;

  // Triplet evaluation, bypassing any closed form.
  double psi_triplet(double lambda) const;
  double psi_prime_triplet(double lambda) const;

  // Power governing W near 0: W(x) ~ C x^p with p = 1 when sigma2 > 0,
  // a - 1 for a pure power-law jump part, 1 otherwise.
  double scale_exponent_at_zero() const;

 private:
  double alpha_;
  double sigma2_;
  LevyMeasure levy_;
  std::optional<ClosedForm> closed_;
  double tol_;
};

enum class Criticality { Critical, Subcritical };

struct MechanismClass {
  Criticality criticality = Criticality::Critical;
  bool grey_holds = false;
  bool potential_finite = false;
  bool xlogx_holds = false;
  // Numeric values of the underlying integrals (+inf when divergent):
  // int_1^inf dl/psi(l), int_0^1 u/psi(u) du, int_1^inf r ln r pi(dr).
  double grey_integral = 0.0;
  double potential_integral = 0.0;
  double xlogx_integral = 0.0;

  bool operator==(const MechanismClass&) const = default;
};

// Throws NumericalError when the tail of a tabulated pi is unknown.
MechanismClass classify(const BranchingMechanism& m);

std::pair<double, double> levy_tails(const BranchingMechanism& m, double r);

const char* to_string(Criticality c);

}  // namespace cbcond

#include "cbcond/detail/levy_integrate.hpp"
