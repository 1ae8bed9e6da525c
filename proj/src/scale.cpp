#include "cbcond/scale.hpp"

#include <cmath>
#include <string>

#include "cbcond/errors.hpp"
#include "cbcond/quadrature.hpp"

namespace cbcond {

namespace {

double checked(const InversionResult& r, double x, const InversionConfig& cfg, const char* what) {
  if (r.delta > cfg.max_delta * std::abs(r.value) + cfg.abs_floor) {
    throw NumericalError(std::string("Laplace inversion of ") + what + " did not converge at x = " +
                         std::to_string(x) + " (A = " + std::to_string(cfg.euler.A) +
                         ", terms = " + std::to_string(cfg.euler.terms) +
                         ", euler_terms = " + std::to_string(cfg.euler.euler_terms) + ")");
  }
  return r.value;
}

}  // namespace

ScaleFunction::ScaleFunction(ExtinctionKernel kernel, InversionConfig cfg)
    : kernel_(std::move(kernel)), cfg_(cfg) {
  if (!(cfg_.crossover > 0.0)) throw ConfigError("scale crossover must be positive");
  const auto& m = kernel_.mechanism();
  if (cfg_.prefer_closed_form && m.closed_form()) closed_ = OracleFamily::detect(m);
  potential_finite_ = classify(m).potential_finite;
  if (!closed_) {
    p0_ = m.scale_exponent_at_zero();
    const auto* pl = m.levy().power_law_params();
    if (m.sigma2() > 0.0 && pl) {
      delta_ = 2.0 - pl->a;
    } else if (pl) {
      delta_ = pl->a - 1.0;
    }
    const double x0 = cfg_.crossover;
    const double w0 = W_inverted(x0);
    const double wp0 = W_prime_inverted(x0);
    blend_b_ = (x0 * wp0 - p0_ * w0) / delta_;
    blend_a_ = w0 - blend_b_;
  }
}

double ScaleFunction::W_inverted(double x) const {
  const auto& m = kernel_.mechanism();
  auto F = [&m](cdouble s) { return 1.0 / m.psi(s); };
  return checked(invert_laplace(F, x, cfg_.euler), x, cfg_, "1/psi");
}

double ScaleFunction::W_prime_inverted(double x) const {
  const auto& m = kernel_.mechanism();
  auto F = [&m](cdouble s) { return s / m.psi(s); };
  return checked(invert_laplace(F, x, cfg_.euler), x, cfg_, "l/psi");
}

double ScaleFunction::W(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (closed_) return closed_->W(x);
  if (x < cfg_.crossover) {
    const double y = x / cfg_.crossover;
    return blend_a_ * std::pow(y, p0_) + blend_b_ * std::pow(y, p0_ + delta_);
  }
  return W_inverted(x);
}

double ScaleFunction::W_prime(double x) const {
  if (!(x > 0.0)) throw DomainError("W' needs x > 0");
  if (closed_) return closed_->W_prime(x);
  if (x < cfg_.crossover) {
    const double y = x / cfg_.crossover;
    return (p0_ * blend_a_ * std::pow(y, p0_ - 1.0) +
            (p0_ + delta_) * blend_b_ * std::pow(y, p0_ + delta_ - 1.0)) /
           cfg_.crossover;
  }
  return W_prime_inverted(x);
}

double ScaleFunction::stationary_density(double x) const {
  if (!(x > 0.0)) throw DomainError("stationary density needs x > 0");
  return W(x) / x;
}

double ScaleFunction::potential_density(double x, double y) const {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("potential density needs x, y > 0");
  if (y <= x) return W(y) / y;
  return (W(y) - W(y - x)) / y;
}

std::optional<double> ScaleFunction::potential_mass(double x) const {
  if (!(x > 0.0)) throw DomainError("potential mass needs x > 0");
  if (!potential_finite_) return std::nullopt;
  // int_0^inf (1 - exp(-x varphi(t))) dt with t = phi(u).
  const auto& m = kernel_.mechanism();
  auto f = [&](double u) { return -std::expm1(-x * u) / (u * m.psi_over_lambda(u)); };
  const double lo = quad::tanh_sinh(f, 0.0, 1.0, 1e-10);
  const double hi = quad::exp_sinh(f, 1.0, 1e-10);
  return lo + hi;
}

double ScaleFunction::potential_laplace(double x, double lambda) const {
  if (!(x > 0.0) || !(lambda > 0.0)) throw DomainError("potential transform needs x, l > 0");
  auto f = [&](double y) { return std::exp(-lambda * y) * potential_density(x, y); };
  // Split at the kink y = x.
  return quad::tanh_sinh(f, 0.0, x, 1e-11) + quad::exp_sinh(f, x, 1e-11);
}

}  // namespace cbcond
