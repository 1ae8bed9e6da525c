#include "cbcond/extinction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "cbcond/errors.hpp"
#include "cbcond/quadrature.hpp"

namespace cbcond {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCacheLo = -12.0 * 2.302585092994046;  // log(1e-12)
constexpr double kCacheHi = 12.0 * 2.302585092994046;
constexpr int kCacheNodes = 121;

// Fritsch-Carlson slopes for monotone cubic Hermite interpolation.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  d[0] = delta[0];
  d[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  return d;
}

}  // namespace

ExtinctionKernel::ExtinctionKernel(BranchingMechanism m, double tol_phi)
    : m_(std::move(m)), tol_(tol_phi) {
  const auto cls = classify(m_);
  if (!cls.grey_holds) {
    throw ConfigError("non-extinguishing mechanism: Grey's condition int^inf dl/psi(l) < inf fails");
  }
  phi_one_ = quad::exp_sinh([this](double s) { return 1.0 / m_.psi_over_lambda(std::exp(s)); },
                            0.0, 1e-14);

  // Ascending in log phi, i.e. descending in lambda.
  for (int i = kCacheNodes - 1; i >= 0; --i) {
    const double x = kCacheLo + (kCacheHi - kCacheLo) * i / (kCacheNodes - 1);
    const double p = phi_log(x);
    if (!(p > 0.0) || !std::isfinite(p)) continue;
    const double lp = std::log(p);
    if (!cache_log_phi_.empty() && !(lp > cache_log_phi_.back())) continue;
    cache_log_phi_.push_back(lp);
    cache_log_lambda_.push_back(x);
  }
  if (cache_log_phi_.size() >= 2) cache_slope_ = pchip_slopes(cache_log_phi_, cache_log_lambda_);
}

double ExtinctionKernel::phi_log(double x, double* err) const {
  auto integrand = [this](double s) { return 1.0 / m_.psi_over_lambda(std::exp(s)); };
  if (err) *err = 0.0;
  if (x >= 0.0) {
    if (x == 0.0 && phi_one_ > 0.0 && !err) return phi_one_;
    return quad::exp_sinh(integrand, x, 1e-14, err);
  }
  // Gauss-Kronrod on [x, 0], in unit-length chunks for long ranges so the
  // adaptive error control stays local.
  double e1 = 0.0;
  double sum = err ? quad::exp_sinh(integrand, 0.0, 1e-14, &e1) : phi_one_;
  if (err) *err = e1;
  double hi = 0.0;
  while (hi > x) {
    const double lo = std::max(x, hi - 8.0);
    double e = 0.0;
    sum += quad::gauss_kronrod(integrand, lo, hi, 1e-14, &e);
    if (err) *err += e;
    if (!std::isfinite(sum)) return kInf;
    hi = lo;
  }
  return sum;
}

double ExtinctionKernel::phi(double lambda, double* err) const {
  if (!(lambda > 0.0)) throw DomainError("phi requires lambda > 0");
  if (err) *err = 0.0;
  if (std::isinf(lambda)) return 0.0;
  return phi_log(std::log(lambda), err);
}

double ExtinctionKernel::varphi_error(double t) const {
  const double v = varphi(t);
  return std::abs(phi(v) - t) * m_.psi(v);
}

double ExtinctionKernel::seed_log_lambda(double log_t, double* lo, double* hi) const {
  const auto& xs = cache_log_phi_;
  const auto& ys = cache_log_lambda_;
  if (xs.size() < 2 || log_t < xs.front() || log_t > xs.back()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), log_t);
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  if (i == xs.size()) --i;
  const std::size_t k = i - 1;
  const double h = xs[k + 1] - xs[k];
  const double s = (log_t - xs[k]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  // Larger phi means smaller lambda: bracket in log lambda.
  *lo = ys[k + 1];
  *hi = ys[k];
  return h00 * ys[k] + h10 * h * cache_slope_[k] + h01 * ys[k + 1] + h11 * h * cache_slope_[k + 1];
}

double ExtinctionKernel::log_varphi(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("varphi requires 0 < t < inf");
  const double tol = 1e-14 * std::max(t, 1.0);
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = lo;
  double x = seed_log_lambda(std::log(t), &lo, &hi);
  if (std::isnan(x)) {
    // Geometric bracket expansion in log lambda; phi decreases in x.
    double a = std::clamp(-std::log(t), kCacheLo, kCacheHi);
    double step = 1.0;
    double pa = phi_log(a);
    int guard = 0;
    if (pa > t) {
      double b = a + step;
      while (phi_log(b) > t) {
        a = b;
        step *= 2.0;
        b = a + step;
        if (++guard > 60) throw NumericalError("varphi: bracket expansion failed (upper)");
      }
      lo = a;
      hi = b;
    } else {
      double b = a - step;
      while (phi_log(b) < t) {
        a = b;
        step *= 2.0;
        b = a - step;
        if (++guard > 60) throw NumericalError("varphi: bracket expansion failed (lower)");
      }
      lo = b;
      hi = a;
    }
    x = 0.5 * (lo + hi);
  }
  // Safeguarded Newton on g(x) = phi(e^x) - t with g'(x) = -1/(psi(e^x)/e^x).
  double g = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    g = phi_log(x) - t;
    if (std::abs(g) <= tol) return x;
    if (g > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double dg = -1.0 / m_.psi_over_lambda(std::exp(x));
    double next = x - g / dg;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4e-16 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  if (std::abs(g) <= 1e-10 * std::max(t, 1.0)) return x;
  std::ostringstream os;
  os.precision(17);
  os << "varphi(" << t << "): root finding did not converge; last bracket in log lambda [" << lo
     << ", " << hi << "], residual " << g;
  throw NumericalError(os.str());
}

VarphiValue ExtinctionKernel::varphi_checked(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("varphi requires 0 < t < inf");
  VarphiValue out;
  if (t <= phi(kVarphiCap)) {
    out.value = kVarphiCap;
    out.capped = true;
    return out;
  }
  const double lv = log_varphi(t);
  const double tiny = std::numeric_limits<double>::min();
  if (lv < std::log(tiny)) {
    out.value = tiny;
    out.underflow = true;
    return out;
  }
  out.value = std::exp(lv);
  return out;
}

double ExtinctionKernel::varphi_ratio(double t, double s) const {
  return std::exp(log_varphi(t + s) - log_varphi(t));
}

double ExtinctionKernel::u_t(double t, double lambda) const {
  if (!(t >= 0.0)) throw DomainError("u_t requires t >= 0");
  if (!(lambda > 0.0)) throw DomainError("u_t requires lambda > 0");
  if (t == 0.0) return lambda;
  return varphi(t + phi(lambda));
}

double ExtinctionKernel::u_t_ode(double t, double lambda, double rel_tol) const {
  if (!(t >= 0.0) || !(lambda > 0.0)) throw DomainError("u_t_ode requires t >= 0, lambda > 0");
  namespace odeint = boost::numeric::odeint;
  using State = double;
  State y = std::log(lambda);
  auto rhs = [this](const State& s, State& dsdt, double) { dsdt = -m_.psi_over_lambda(std::exp(s)); };
  auto stepper = odeint::make_controlled(rel_tol, rel_tol, odeint::runge_kutta_dopri5<State>());
  const double dt0 = std::min(t, 1e-3 / std::max(1.0, m_.psi_over_lambda(lambda)));
  if (t > 0.0) odeint::integrate_adaptive(stepper, rhs, y, 0.0, t, dt0);
  return std::exp(y);
}

double ExtinctionKernel::extinction_cdf(double x, double t) const {
  if (!(x > 0.0) || !(t > 0.0)) throw DomainError("extinction_cdf requires x, t > 0");
  return std::exp(-x * varphi(t));
}

double ExtinctionKernel::extinction_pdf(double x, double t) const {
  if (!(x > 0.0) || !(t > 0.0)) throw DomainError("extinction_pdf requires x, t > 0");
  const double v = varphi(t);
  return x * std::exp(-x * v) * m_.psi(v);
}

}  // namespace cbcond
