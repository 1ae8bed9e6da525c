#include "cbcond/mechanism.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "cbcond/errors.hpp"
#include "cbcond/quadrature.hpp"

namespace cbcond {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTaylorCut = 1e-4;

// exp(-s) - 1 + s for s >= 0.
// sum_{k>=2} (-s)^k / k! / s^2, truncated after s^7.
double comp_series_over_s2(double s) {
  double term = 0.5;
  double sum = term;
  for (int k = 3; k <= 9; ++k) {
    term *= -s / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

double comp(double s) {
  if (s < 0.1) return s * s * comp_series_over_s2(s);
  return std::expm1(-s) + s;
}

cdouble comp(cdouble w) {
  if (std::abs(w) < 0.1) {
    // w^2/2 - w^3/6 + ... - w^9/9!
    cdouble term = w * w / 2.0;
    cdouble sum = term;
    for (int k = 3; k <= 9; ++k) {
      term *= -w / static_cast<double>(k);
      sum += term;
    }
    return sum;
  }
  return std::exp(-w) - 1.0 + w;
}

// 1 - exp(-s).
double one_minus_exp(double s) { return -std::expm1(-s); }

// comp(s) / s^2 and (1 - exp(-s)) / s, finite as s -> 0.
double comp_over_s2(double s) {
  if (s < 0.1) return comp_series_over_s2(s);
  return (std::expm1(-s) + s) / (s * s);
}
double one_minus_exp_over_s(double s) {
  if (s < kTaylorCut) return 1.0 - s * (0.5 - s * (1.0 / 6.0 - s / 24.0));
  return -std::expm1(-s) / s;
}

// Simpson's rule on [lo, hi]; exact for cubics, which covers r^k times a
// linear density for k <= 2.
template <class F>
double simpson(F&& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// LevyMeasure

LevyMeasure LevyMeasure::power_law(double c, double a) {
  require(std::isfinite(c) && c > 0.0, "power-law Levy measure needs c > 0");
  require(std::isfinite(a) && a > 1.0 && a < 2.0,
          "power-law Levy measure needs exponent a in (1, 2)");
  LevyMeasure m;
  m.rep_ = PowerLawDensity{c, a};
  const double rel = 1e-14;
  // Split at s = 1; the (s - 1) s^(-1-a) part of the upper piece is exact.
  const double lower0 = quad::tanh_sinh(
      [a](double s) { return comp_over_s2(s) * std::pow(s, 1.0 - a); }, 0.0, 1.0, rel);
  const double upper0 =
      quad::exp_sinh([a](double s) { return std::exp(-s) * std::pow(s, -1.0 - a); }, 1.0, rel);
  m.k0_ = lower0 + upper0 + 1.0 / (a - 1.0) - 1.0 / a;
  const double lower1 =
      quad::tanh_sinh(
      [a](double s) { return one_minus_exp_over_s(s) * std::pow(s, 1.0 - a); }, 0.0, 1.0, rel);
  const double upper1 =
      quad::exp_sinh([a](double s) { return std::exp(-s) * std::pow(s, -a); }, 1.0, rel);
  m.k1_ = lower1 + 1.0 / (a - 1.0) - upper1;
  return m;
}

LevyMeasure LevyMeasure::tabulated(std::vector<double> r, std::vector<double> density,
                                   std::optional<double> tail_exponent) {
  require(r.size() >= 2, "tabulated Levy density needs at least two grid points");
  require(r.size() == density.size(), "tabulated Levy density: r and density differ in length");
  for (std::size_t i = 0; i < r.size(); ++i) {
    require(std::isfinite(r[i]) && r[i] > 0.0, "tabulated Levy density: grid must be positive");
    require(i == 0 || r[i] > r[i - 1], "tabulated Levy density: grid must be strictly increasing");
    require(std::isfinite(density[i]) && density[i] >= 0.0,
            "tabulated Levy density must be nonnegative");
  }
  if (tail_exponent) {
    // int^inf r pi(dr) diverges unless the tail exponent exceeds 1.
    require(std::isfinite(*tail_exponent) && *tail_exponent > 1.0,
            "tabulated Levy density: divergent integral of r*pi(dr) at infinity "
            "(tail exponent must exceed 1)");
  }
  LevyMeasure m;
  m.rep_ = TabulatedDensity{std::move(r), std::move(density), tail_exponent};
  return m;
}

LevyMeasure::Kind LevyMeasure::kind() const {
  if (std::holds_alternative<PowerLawDensity>(rep_)) return Kind::PowerLaw;
  if (std::holds_alternative<TabulatedDensity>(rep_)) return Kind::Tabulated;
  return Kind::None;
}

double LevyMeasure::density(double r) const {
  if (!(r > 0.0)) return 0.0;
  if (const auto* p = power_law_params()) return p->c * std::pow(r, -1.0 - p->a);
  if (const auto* t = table()) {
    if (r < t->r.front()) return 0.0;
    if (r >= t->r.back()) {
      if (r == t->r.back()) return t->density.back();
      if (!t->tail_exponent) return 0.0;
      return t->density.back() * std::pow(r / t->r.back(), -1.0 - *t->tail_exponent);
    }
    const auto it = std::upper_bound(t->r.begin(), t->r.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - t->r.begin()) - 1;
    const double w = (r - t->r[i]) / (t->r[i + 1] - t->r[i]);
    return (1.0 - w) * t->density[i] + w * t->density[i + 1];
  }
  return 0.0;
}

namespace {

// Sum of f over the cells of a table plus its tail region.
template <class T, class CellF, class TailF>
T over_table(const TabulatedDensity& t, CellF&& cell, TailF&& tail) {
  T sum{};
  for (std::size_t i = 0; i + 1 < t.r.size(); ++i) sum += cell(t.r[i], t.r[i + 1]);
  if (t.tail_exponent) sum += tail(t.r.back(), t.density.back(), *t.tail_exponent);
  return sum;
}

}  // namespace

double LevyMeasure::compensated(double lambda) const {
  if (!(lambda > 0.0)) return 0.0;
  if (const auto* p = power_law_params()) return p->c * k0_ * std::pow(lambda, p->a);
  if (const auto* t = table()) {
    return over_table<double>(
        *t,
        [&](double lo, double hi) {
          // lambda^2 is factored out so the integrand cannot underflow.
          return lambda * lambda *
                 quad::gauss_kronrod(
                     [&](double r) { return r * r * comp_over_s2(lambda * r) * density(r); }, lo,
                     hi, 1e-12);
        },
        [&](double R, double dR, double a) {
          // R^(1+a) l^a int_{lR}^inf comp(s) s^(-1-a) ds; the full integral is Gamma(-a).
          const double z = lambda * R;
          double g;
          if (z < 1.0) {
            g = std::tgamma(-a) -
                quad::tanh_sinh([a](double s) { return comp_over_s2(s) * std::pow(s, 1.0 - a); },
                                0.0, z, 1e-12);
          } else {
            g = quad::exp_sinh([a](double s) { return comp(s) * std::pow(s, -1.0 - a); }, z, 1e-12);
          }
          return dR * std::pow(R, 1.0 + a) * std::pow(lambda, a) * g;
        });
  }
  return 0.0;
}

cdouble LevyMeasure::compensated(cdouble z) const {
  if (z == 0.0) return 0.0;
  if (const auto* p = power_law_params()) return p->c * k0_ * std::pow(z, p->a);
  if (const auto* t = table()) {
    return over_table<cdouble>(
        *t,
        [&](double lo, double hi) {
          return quad::gauss_kronrod([&](double r) { return comp(z * r) * density(r); }, lo, hi,
                                     1e-12);
        },
        [&](double R, double dR, double a) {
          // int_R^inf exp(-z r) (r/R)^(-1-a) dr along the ray r = R + s*w,
          // w = conj(z)/|z|, on which exp(-z r) decays monotonically.
          const double mod = std::abs(z);
          const cdouble w = std::conj(z) / mod;
          auto f = [&](double s) { return std::exp(-mod * s) * std::pow((R + s * w) / R, -1.0 - a); };
          const double re = quad::exp_sinh([&](double s) { return f(s).real(); }, 0.0, 1e-12);
          const double im = quad::exp_sinh([&](double s) { return f(s).imag(); }, 0.0, 1e-12);
          const cdouble t0 = w * std::exp(-z * R) * cdouble(re, im);
          return dR * (t0 - R / a + z * R * R / (a - 1.0));
        });
  }
  return 0.0;
}

double LevyMeasure::compensated_over_lambda(double lambda) const {
  if (is_none()) return 0.0;
  if (!(lambda > 0.0)) return 0.0;
  if (const auto* p = power_law_params()) return p->c * k0_ * std::pow(lambda, p->a - 1.0);
  if (std::isinf(lambda)) return mean_above(0.0);
  return compensated(lambda) / lambda;
}

double LevyMeasure::damped_first_moment(double lambda) const {
  if (!(lambda > 0.0)) return 0.0;
  if (const auto* p = power_law_params()) return p->c * k1_ * std::pow(lambda, p->a - 1.0);
  if (const auto* t = table()) {
    return over_table<double>(
        *t,
        [&](double lo, double hi) {
          return quad::gauss_kronrod(
              [&](double r) { return one_minus_exp(lambda * r) * r * density(r); }, lo, hi, 1e-12);
        },
        [&](double R, double dR, double a) {
          return dR * quad::exp_sinh(
                          [&](double r) {
                            return one_minus_exp(lambda * r) * r * std::pow(r / R, -1.0 - a);
                          },
                          R, 1e-12);
        });
  }
  return 0.0;
}

double LevyMeasure::tail(double r) const {
  if (const auto* p = power_law_params()) return p->c * std::pow(r, -p->a) / p->a;
  if (const auto* t = table()) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t->r.size(); ++i) {
      const double lo = std::max(r, t->r[i]);
      const double hi = t->r[i + 1];
      if (hi > lo) sum += simpson([&](double y) { return density(y); }, lo, hi);
    }
    if (t->tail_exponent) {
      const double a = *t->tail_exponent;
      const double R = t->r.back();
      const double M = std::max(r, R);
      sum += t->density.back() * std::pow(R, 1.0 + a) * std::pow(M, -a) / a;
    }
    return sum;
  }
  return 0.0;
}

double LevyMeasure::double_tail(double r) const {
  if (const auto* p = power_law_params()) {
    return p->c * std::pow(r, 1.0 - p->a) / (p->a * (p->a - 1.0));
  }
  if (const auto* t = table()) {
    // pi_bar_bar(r) = int_r^inf (y - r) pi(dy).
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t->r.size(); ++i) {
      const double lo = std::max(r, t->r[i]);
      const double hi = t->r[i + 1];
      if (hi > lo) sum += simpson([&](double y) { return (y - r) * density(y); }, lo, hi);
    }
    if (t->tail_exponent) {
      const double a = *t->tail_exponent;
      const double R = t->r.back();
      const double M = std::max(r, R);
      sum += t->density.back() * std::pow(R, 1.0 + a) *
             (std::pow(M, 1.0 - a) / (a - 1.0) - r * std::pow(M, -a) / a);
    }
    return sum;
  }
  return 0.0;
}

double LevyMeasure::mean_above(double eps) const {
  if (const auto* p = power_law_params()) {
    if (!(eps > 0.0)) return kInf;
    return p->c * std::pow(eps, 1.0 - p->a) / (p->a - 1.0);
  }
  if (const auto* t = table()) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t->r.size(); ++i) {
      const double lo = std::max(eps, t->r[i]);
      const double hi = t->r[i + 1];
      if (hi > lo) sum += simpson([&](double y) { return y * density(y); }, lo, hi);
    }
    if (t->tail_exponent) {
      const double a = *t->tail_exponent;
      const double R = t->r.back();
      const double M = std::max(eps, R);
      sum += t->density.back() * std::pow(R, 1.0 + a) * std::pow(M, 1.0 - a) / (a - 1.0);
    }
    return sum;
  }
  return 0.0;
}

double LevyMeasure::second_moment_below(double eps) const {
  if (!(eps > 0.0)) return 0.0;
  if (const auto* p = power_law_params()) {
    return p->c * std::pow(eps, 2.0 - p->a) / (2.0 - p->a);
  }
  if (const auto* t = table()) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t->r.size(); ++i) {
      const double lo = t->r[i];
      const double hi = std::min(eps, t->r[i + 1]);
      if (hi > lo) sum += simpson([&](double y) { return y * y * density(y); }, lo, hi);
    }
    const double R = t->r.back();
    if (t->tail_exponent && eps > R) {
      const double a = *t->tail_exponent;
      const double scale = t->density.back() * std::pow(R, 1.0 + a);
      sum += (a == 2.0) ? scale * std::log(eps / R)
                        : scale * (std::pow(eps, 2.0 - a) - std::pow(R, 2.0 - a)) / (2.0 - a);
    }
    return sum;
  }
  return 0.0;
}

double LevyMeasure::xlogx_integral() const {
  if (const auto* p = power_law_params()) return p->c / ((p->a - 1.0) * (p->a - 1.0));
  if (const auto* t = table()) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t->r.size(); ++i) {
      const double lo = std::max(1.0, t->r[i]);
      const double hi = t->r[i + 1];
      if (hi > lo) {
        sum += quad::gauss_kronrod([&](double y) { return y * std::log(y) * density(y); }, lo, hi,
                                   1e-12);
      }
    }
    if (t->tail_exponent) {
      const double a = *t->tail_exponent;
      const double R = t->r.back();
      const double M = std::max(1.0, R);
      const double lm = std::log(M);
      sum += t->density.back() * std::pow(R, 1.0 + a) * std::pow(M, 1.0 - a) *
             (lm / (a - 1.0) + 1.0 / ((a - 1.0) * (a - 1.0)));
    }
    return sum;
  }
  return 0.0;
}

double LevyMeasure::integrate_cells(const std::function<double(double)>& g, double lo,
                                    double hi) const {
  const auto& t = *table();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < t.r.size(); ++i) {
    const double a = std::max(lo, t.r[i]);
    const double b = std::min(hi, t.r[i + 1]);
    if (b > a) sum += quad::tanh_sinh([&](double r) { return g(r) * density(r); }, a, b, 1e-10);
  }
  if (t.tail_exponent && hi > t.r.back()) {
    const double a = std::max(lo, t.r.back());
    sum += quad::tanh_sinh([&](double r) { return g(r) * density(r); }, a, hi, 1e-10);
  }
  return sum;
}

std::optional<double> LevyMeasure::tail_index() const {
  if (const auto* p = power_law_params()) return p->a;
  if (const auto* t = table()) return t->tail_exponent;
  return kInf;
}

// ---------------------------------------------------------------------------
// JumpSampler

JumpSampler::JumpSampler(const LevyMeasure& levy, double eps) : levy_(&levy), eps_(eps) {
  if (!(eps > 0.0)) throw ConfigError("small-jump cutoff must be positive");
  if (const auto* p = levy.power_law_params()) {
    rate_ = levy.tail(eps);
    (void)p;
    return;
  }
  if (const auto* t = levy.table()) {
    nodes_.push_back(eps);
    for (double r : t->r) {
      if (r > eps) nodes_.push_back(r);
    }
    cumulative_.assign(1, 0.0);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      const double lo = nodes_[i];
      const double hi = nodes_[i + 1];
      const double mass = 0.5 * (hi - lo) * (levy.density(lo) + levy.density(hi));
      cumulative_.push_back(cumulative_.back() + mass);
    }
    rate_ = levy.tail(eps);
  }
}

double JumpSampler::sample(double u) const {
  if (const auto* p = levy_->power_law_params()) return eps_ * std::pow(u, -1.0 / p->a);
  const auto& t = *levy_->table();
  double target = u * rate_;
  const double body = cumulative_.back();
  if (target < body) {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    const double lo = nodes_[i];
    const double hi = nodes_[i + 1];
    const double d0 = levy_->density(lo);
    const double slope = (levy_->density(hi) - d0) / (hi - lo);
    const double m = target - cumulative_[i];
    // Solve d0*y + slope*y^2/2 = m for y in [0, hi - lo].
    double y;
    if (std::abs(slope) * (hi - lo) < 1e-12 * std::max(d0, 1e-300)) {
      y = m / d0;
    } else {
      const double disc = std::max(0.0, d0 * d0 + 2.0 * slope * m);
      y = 2.0 * m / (d0 + std::sqrt(disc));
    }
    return std::clamp(lo + y, lo, hi);
  }
  // Power-law tail beyond the last node.
  const double a = *t.tail_exponent;
  const double M = std::max(eps_, t.r.back());
  const double tail_mass = rate_ - body;
  const double frac = std::clamp((target - body) / tail_mass, 0.0, 1.0 - 1e-16);
  return M * std::pow(1.0 - frac, -1.0 / a);
}

// ---------------------------------------------------------------------------
// ClosedForm

ClosedForm ClosedForm::parse(const std::string& name) {
  if (name == "quadratic") return quadratic();
  if (name == "linear_plus_quadratic") return linear_plus_quadratic();
  if (name.rfind("stable(", 0) == 0 && name.size() > 8 && name.back() == ')') {
    const std::string inner = name.substr(7, name.size() - 8);
    std::size_t used = 0;
    double beta = 0.0;
    try {
      beta = std::stod(inner, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == inner.size() && used > 0, "closed_form: cannot parse beta in '" + name + "'");
    require(beta > 1.0 && beta <= 2.0, "closed_form stable(beta) needs beta in (1, 2]");
    return stable(beta);
  }
  throw ConfigError("closed_form: unknown registry name '" + name +
                    "' (expected quadratic, stable(beta) or linear_plus_quadratic)");
}

std::string ClosedForm::name() const {
  switch (kind) {
    case Kind::Quadratic:
      return "quadratic";
    case Kind::LinearPlusQuadratic:
      return "linear_plus_quadratic";
    case Kind::Stable: {
      std::ostringstream os;
      os.precision(17);
      os << "stable(" << beta << ")";
      return os.str();
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// BranchingMechanism

BranchingMechanism::BranchingMechanism(double alpha, double sigma2, LevyMeasure levy,
                                       std::optional<ClosedForm> closed_form, double tol)
    : alpha_(alpha), sigma2_(sigma2), levy_(std::move(levy)), closed_(closed_form), tol_(tol) {
  require(std::isfinite(alpha), "alpha must be finite");
  require(alpha >= 0.0, "supercritical mechanisms (alpha < 0) are not supported");
  require(std::isfinite(sigma2) && sigma2 >= 0.0, "sigma2 must be finite and nonnegative");
  require(tol > 0.0 && tol < 1e-2, "tol must lie in (0, 1e-2)");
  require(alpha > 0.0 || sigma2 > 0.0 || !levy_.is_none(),
          "degenerate mechanism: psi vanishes identically");
  if (closed_) {
    const double a0 = closed_->kind == ClosedForm::Kind::LinearPlusQuadratic ? 1.0 : 0.0;
    require(alpha == a0, "closed_form " + closed_->name() + " has alpha = " + std::to_string(a0) +
                             " but the triplet declares alpha = " + std::to_string(alpha));
    // The triplet must reproduce the closed form on a log-spaced grid.
    for (int i = 0; i < 16; ++i) {
      const double lambda = std::pow(10.0, -3.0 + 6.0 * i / 15.0);
      const double closed = psi(lambda);
      const double trip = psi_triplet(lambda);
      if (std::abs(closed - trip) > 1e-8 * std::abs(closed)) {
        std::ostringstream os;
        os.precision(12);
        os << "closed_form " << closed_->name() << " disagrees with the (alpha, sigma2, levy) "
           << "triplet at lambda=" << lambda << ": " << closed << " vs " << trip;
        throw ConfigError(os.str());
      }
    }
  }
}

BranchingMechanism BranchingMechanism::from_closed_form(const ClosedForm& cf, double tol) {
  switch (cf.kind) {
    case ClosedForm::Kind::Quadratic:
      return {0.0, 2.0, LevyMeasure::none(), cf, tol};
    case ClosedForm::Kind::LinearPlusQuadratic:
      return {1.0, 2.0, LevyMeasure::none(), cf, tol};
    case ClosedForm::Kind::Stable: {
      const double b = cf.beta;
      if (b == 2.0) return {0.0, 2.0, LevyMeasure::none(), cf, tol};
      return {0.0, 0.0, LevyMeasure::power_law(b * (b - 1.0) / std::tgamma(2.0 - b), b), cf, tol};
    }
  }
  throw ConfigError("unknown closed form");
}

double BranchingMechanism::psi_triplet(double lambda) const {
  if (!(lambda > 0.0)) return 0.0;
  return alpha_ * lambda + 0.5 * sigma2_ * lambda * lambda + levy_.compensated(lambda);
}

double BranchingMechanism::psi_prime_triplet(double lambda) const {
  return alpha_ + sigma2_ * lambda + levy_.damped_first_moment(lambda);
}

double BranchingMechanism::psi(double lambda) const {
  if (!(lambda > 0.0)) return 0.0;
  if (closed_) {
    switch (closed_->kind) {
      case ClosedForm::Kind::Quadratic:
        return lambda * lambda;
      case ClosedForm::Kind::LinearPlusQuadratic:
        return lambda + lambda * lambda;
      case ClosedForm::Kind::Stable:
        return std::pow(lambda, closed_->beta);
    }
  }
  return psi_triplet(lambda);
}

cdouble BranchingMechanism::psi(cdouble z) const {
  if (closed_) {
    switch (closed_->kind) {
      case ClosedForm::Kind::Quadratic:
        return z * z;
      case ClosedForm::Kind::LinearPlusQuadratic:
        return z + z * z;
      case ClosedForm::Kind::Stable:
        return std::pow(z, closed_->beta);
    }
  }
  return alpha_ * z + 0.5 * sigma2_ * z * z + levy_.compensated(z);
}

double BranchingMechanism::psi_prime(double lambda) const {
  if (closed_) {
    switch (closed_->kind) {
      case ClosedForm::Kind::Quadratic:
        return 2.0 * lambda;
      case ClosedForm::Kind::LinearPlusQuadratic:
        return 1.0 + 2.0 * lambda;
      case ClosedForm::Kind::Stable:
        return closed_->beta * std::pow(lambda, closed_->beta - 1.0);
    }
  }
  return psi_prime_triplet(lambda);
}

double BranchingMechanism::psi_over_lambda(double lambda) const {
  if (!(lambda > 0.0)) return alpha_;
  if (std::isinf(lambda)) {
    if (sigma2_ > 0.0 || levy_.kind() == LevyMeasure::Kind::PowerLaw) return kInf;
    return alpha_ + levy_.compensated_over_lambda(lambda);
  }
  if (closed_) {
    switch (closed_->kind) {
      case ClosedForm::Kind::Quadratic:
        return lambda;
      case ClosedForm::Kind::LinearPlusQuadratic:
        return 1.0 + lambda;
      case ClosedForm::Kind::Stable:
        return std::pow(lambda, closed_->beta - 1.0);
    }
  }
  return alpha_ + 0.5 * sigma2_ * lambda + levy_.compensated_over_lambda(lambda);
}

double BranchingMechanism::psi_prime_minus_alpha(double lambda) const {
  if (!(lambda > 0.0)) return 0.0;
  if (closed_) {
    switch (closed_->kind) {
      case ClosedForm::Kind::Quadratic:
      case ClosedForm::Kind::LinearPlusQuadratic:
        return 2.0 * lambda;
      case ClosedForm::Kind::Stable:
        return closed_->beta * std::pow(lambda, closed_->beta - 1.0);
    }
  }
  return sigma2_ * lambda + levy_.damped_first_moment(lambda);
}

double BranchingMechanism::scale_exponent_at_zero() const {
  if (closed_ && closed_->kind == ClosedForm::Kind::Stable) return closed_->beta - 1.0;
  if (sigma2_ > 0.0) return 1.0;
  if (const auto* p = levy_.power_law_params()) return p->a - 1.0;
  return 1.0;
}

// ---------------------------------------------------------------------------
// classification

const char* to_string(Criticality c) {
  return c == Criticality::Critical ? "Critical" : "Subcritical";
}

MechanismClass classify(const BranchingMechanism& m) {
  MechanismClass out;
  out.criticality = m.alpha() == 0.0 ? Criticality::Critical : Criticality::Subcritical;
  const auto& levy = m.levy();
  const auto tail = levy.tail_index();
  if (levy.kind() == LevyMeasure::Kind::Tabulated && !tail) {
    throw NumericalError(
        "classification undecidable: tabulated Levy density has no declared tail exponent");
  }

  // Grey: psi grows at least quadratically with a Gaussian part and like
  // l^a with a power-law jump part; otherwise psi(l) <= (alpha + int r pi) l.
  out.grey_holds = m.sigma2() > 0.0 || levy.kind() == LevyMeasure::Kind::PowerLaw ||
                   (m.closed_form().has_value());
  if (out.grey_holds) {
    // int_1^inf dl/psi(l) = int_0^inf ds / (psi(e^s)/e^s).
    out.grey_integral =
        quad::exp_sinh([&](double s) { return 1.0 / m.psi_over_lambda(std::exp(s)); }, 0.0, 1e-12);
  } else {
    out.grey_integral = kInf;
  }

  // Potential finiteness: int_0+ u/psi(u) du. Near 0, psi(u) ~ alpha u when
  // alpha > 0; for alpha = 0 it is regularly varying with index min(tail, 2).
  if (m.alpha() > 0.0) {
    out.potential_finite = true;
  } else {
    out.potential_finite = tail.has_value() && *tail < 2.0;
  }
  if (out.potential_finite) {
    out.potential_integral =
        quad::tanh_sinh(
            [&](double u) {
              // psi(u)/u underflows only where the integrable singularity is negligible.
              const double p = m.psi_over_lambda(u);
              return p > 0.0 ? 1.0 / p : 0.0;
            },
            0.0, 1.0, 1e-10);
  } else {
    out.potential_integral = kInf;
  }

  // x log x: every accepted pi has tail index > 1, so int^inf r ln r pi(dr)
  // converges; the integral value is still reported.
  out.xlogx_integral = levy.xlogx_integral();
  out.xlogx_holds = m.alpha() > 0.0 && tail.has_value() && *tail > 1.0;
  return out;
}

std::pair<double, double> levy_tails(const BranchingMechanism& m, double r) {
  if (!(r > 0.0)) throw DomainError("levy_tails requires r > 0");
  return {m.levy().tail(r), m.levy().double_tail(r)};
}

}  // namespace cbcond
