#include "cbcond/laws.hpp"

#include <algorithm>
#include <cmath>

#include "cbcond/errors.hpp"
#include "cbcond/quadrature.hpp"
#include "cbcond/reference.hpp"

namespace cbcond {

namespace {

void require_subcritical(const ExtinctionKernel& k, const char* what) {
  if (k.mechanism().critical()) throw DomainError(what);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

// int_lo^hi (psi'(u) - alpha) / psi(u) du.
double log_derivative_integral(const BranchingMechanism& m, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  auto f = [&m](double u) { return m.psi_prime_minus_alpha(u) / m.psi(u); };
  if (lo > 0.0) return quad::gauss_kronrod(f, lo, hi, 1e-12);
  return quad::tanh_sinh(f, lo, hi, 1e-12);
}

}  // namespace

const char* to_string(LawKind k) {
  switch (k) {
    case LawKind::QSD: return "qsd";
    case LawKind::Yaglom: return "yaglom";
    case LawKind::MuS: return "mus";
    case LawKind::Ws: return "ws";
    case LawKind::Vq: return "vq";
    case LawKind::Vinf: return "vinf";
  }
  return "?";
}

LawKind parse_law_kind(const std::string& name) {
  for (LawKind k : {LawKind::QSD, LawKind::Yaglom, LawKind::MuS, LawKind::Ws, LawKind::Vq,
                    LawKind::Vinf}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown law kind '" + name + "' (expected qsd|yaglom|mus|ws|vq|vinf)");
}

LimitLaw::LimitLaw(LawKind kind, double param, std::function<double(double)> laplace)
    : kind_(kind), param_(param), laplace_(std::move(laplace)) {}

double LimitLaw::laplace(double lambda) const {
  if (lambda == 0.0) return 1.0;
  return laplace_(lambda);
}

double LimitLaw::exponent(double lambda) const {
  if (lambda == 0.0) return 0.0;
  if (exponent_) return exponent_(lambda);
  return -std::log(laplace_(lambda));
}

double LimitLaw::density(double x) const {
  if (!density_) throw DomainError(std::string("no density available for law ") + to_string(kind_));
  return density_(x);
}

double LimitLaw::levy_density(double x) const {
  if (!levy_) throw DomainError(std::string("law ") + to_string(kind_) + " has no Levy triplet");
  return levy_(x);
}

LimitLaw& LimitLaw::with_density(std::function<double(double)> f) {
  density_ = std::move(f);
  return *this;
}
LimitLaw& LimitLaw::with_mean(std::optional<double> m) {
  mean_ = m;
  return *this;
}
LimitLaw& LimitLaw::with_exponent(std::function<double(double)> f) {
  exponent_ = std::move(f);
  return *this;
}
LimitLaw& LimitLaw::with_levy_density(std::function<double(double)> f) {
  levy_ = std::move(f);
  return *this;
}

// ---------------------------------------------------------------------------

double qsd_lt(const ExtinctionKernel& k, double beta, double lambda) {
  require_subcritical(k, "no QSD: a critical CB process has no quasi-stationary distribution");
  const double a = k.mechanism().alpha();
  if (!(beta > 0.0 && beta <= a)) throw DomainError("QSD index beta must lie in (0, alpha]");
  require_positive(lambda, "lambda");
  return -std::expm1(-beta * k.phi(lambda));
}

double yaglom_lt(const ExtinctionKernel& k, double lambda) {
  require_subcritical(k, "no Yaglom law in this normalization for a critical mechanism");
  return qsd_lt(k, k.mechanism().alpha(), lambda);
}

std::optional<double> yaglom_mean(const ExtinctionKernel& k) {
  require_subcritical(k, "no Yaglom law in this normalization for a critical mechanism");
  const auto& m = k.mechanism();
  if (!classify(m).xlogx_holds) return std::nullopt;
  // lim e^{-alpha phi(l)} / l
  //   = exp(-alpha phi(1) + int_0^1 (psi(u) - alpha u) / (u psi(u)) du).
  auto f = [&m](double u) {
    const double excess = 0.5 * m.sigma2() * u + m.levy().compensated_over_lambda(u);
    return excess / (u * m.psi_over_lambda(u));
  };
  const double integral = quad::tanh_sinh(f, 0.0, 1.0, 1e-12);
  return std::exp(-m.alpha() * k.phi(1.0) + integral);
}

double mu_s_density(const ScaleFunction& sf, double s, double x) {
  require_positive(s, "s");
  require_positive(x, "x");
  const double v = sf.kernel().varphi(s);
  return std::exp(-v * x) * sf.W(x) / (s * x);
}

double mu_s_lt(const ExtinctionKernel& k, double s, double lambda) {
  require_positive(s, "s");
  if (lambda == 0.0) return 1.0;
  return k.phi(lambda + k.varphi(s)) / s;
}

double ws_lt(const ExtinctionKernel& k, double s, double lambda) {
  require_positive(s, "s");
  if (lambda == 0.0) return 1.0;
  const double a = k.mechanism().alpha();
  const double p = k.phi(lambda + k.varphi(s));
  if (a > 0.0) return std::expm1(-a * p) / std::expm1(-a * s);
  return p / s;
}

double ws_mean(const ExtinctionKernel& k, double s) {
  require_positive(s, "s");
  const auto& m = k.mechanism();
  const double a = m.alpha();
  const double psi_v = m.psi(k.varphi(s));
  if (a > 0.0) return a / (std::expm1(a * s) * psi_v);
  return 1.0 / (s * psi_v);
}

double vq_laplace_exponent(const ExtinctionKernel& k, double q, double lambda) {
  require_positive(q, "q");
  if (lambda < 0.0) throw DomainError("lambda must be nonnegative");
  if (lambda == 0.0) return 0.0;
  const auto& m = k.mechanism();
  const double v = k.varphi(q);
  const double a = m.alpha();
  // phi(l + v) - q = phi(l + v) - phi(v) = -int_v^{l+v} du / psi(u)
  double shift = 0.0;
  if (a > 0.0) shift = a * (k.phi(lambda + v) - q);
  return shift + std::log(m.psi(lambda + v) / m.psi(v));
}

double vq_laplace_exponent_integral(const ExtinctionKernel& k, double q, double lambda) {
  require_positive(q, "q");
  if (lambda < 0.0) throw DomainError("lambda must be nonnegative");
  const double v = k.varphi(q);
  return log_derivative_integral(k.mechanism(), v, lambda + v);
}

double vq_lt(const ExtinctionKernel& k, double q, double lambda) {
  return std::exp(-vq_laplace_exponent(k, q, lambda));
}

double vq_levy_density(const ScaleFunction& sf, double q, double x) {
  require_positive(q, "q");
  require_positive(x, "x");
  const auto& m = sf.mechanism();
  const double v = sf.kernel().varphi(q);
  double bracket = 0.0;
  if (m.sigma2() > 0.0) bracket += m.sigma2() * sf.W_prime(x);
  if (!m.levy().is_none()) {
    const double wx = sf.W(x);
    // Below r0 the difference W(x) - W(x - r) is replaced by W'(x) r.
    const double r0 = 1e-4 * x;
    bracket += sf.W_prime(x) * m.levy().second_moment_below(r0);
    bracket += m.levy().integrate([&](double r) { return (wx - sf.W(x - r)) * r; }, r0, x);
    bracket += wx * m.levy().mean_above(x);
  }
  return std::exp(-v * x) * bracket;
}

bool vinf_exists(const BranchingMechanism& m) { return classify(m).xlogx_holds; }

namespace {

void require_vinf(const ExtinctionKernel& k) {
  if (!vinf_exists(k.mechanism())) {
    throw DomainError("V_inf degenerate at infinity: the x log x condition fails");
  }
}

}  // namespace

double vinf_laplace_exponent_integral(const ExtinctionKernel& k, double lambda) {
  require_vinf(k);
  if (lambda < 0.0) throw DomainError("lambda must be nonnegative");
  return log_derivative_integral(k.mechanism(), 0.0, lambda);
}

double vinf_laplace_exponent(const ExtinctionKernel& k, double lambda) {
  require_vinf(k);
  if (lambda < 0.0) throw DomainError("lambda must be nonnegative");
  if (lambda == 0.0) return 0.0;
  // Near 0 the closed form cancels; use the integral there.
  if (lambda < 1e-3) return vinf_laplace_exponent_integral(k, lambda);
  // log(psi(l) / alpha) + alpha phi(l) + log E[Theta]
  const auto& m = k.mechanism();
  return std::log(m.psi(lambda) / m.alpha()) + m.alpha() * k.phi(lambda) +
         std::log(*yaglom_mean(k));
}

double vinf_lt(const ExtinctionKernel& k, double lambda) {
  return std::exp(-vinf_laplace_exponent(k, lambda));
}

double reverse_limit_lt(const ExtinctionKernel& k, double q, double lambda) {
  require_positive(q, "q");
  if (lambda == 0.0) return 1.0;
  const auto& m = k.mechanism();
  const double v = k.varphi(q);
  return m.psi(v) / m.psi(lambda + v);
}

namespace {

// exp(-a) - exp(-b) from b and b - a.
double exp_difference(double b, double b_minus_a) { return std::exp(-b) * std::expm1(b_minus_a); }

}  // namespace

double normalized_transition_transform(const ExtinctionKernel& k, double x, double t,
                                       double lambda) {
  require_positive(x, "x");
  require_positive(t, "t");
  require_positive(lambda, "lambda");
  const double vt = k.varphi(t);
  const double vs = k.varphi(t + k.phi(lambda));
  const double diff = exp_difference(x * vt, x * (vt - vs));
  return diff / (x * k.mechanism().psi(vt));
}

double normalized_transition_limit(const ExtinctionKernel& k, double lambda) {
  require_positive(lambda, "lambda");
  const double a = k.mechanism().alpha();
  const double p = k.phi(lambda);
  if (a == 0.0) return p;
  return -std::expm1(-a * p) / a;
}

double rescaled_conditional_transform(const ExtinctionKernel& k, double x, double t, double theta) {
  require_positive(x, "x");
  require_positive(t, "t");
  if (theta == 0.0) return 1.0;
  require_positive(theta, "theta");
  const double vt = k.varphi(t);
  const double ut = k.u_t(t, theta / t);
  const double num = exp_difference(x * vt, x * (vt - ut));
  return num / -std::expm1(-x * vt);
}

// ---------------------------------------------------------------------------

LimitLaw qsd_law(const ExtinctionKernel& k, double beta) {
  qsd_lt(k, beta, 1.0);
  LimitLaw law(LawKind::QSD, beta, [&k, beta](double l) { return qsd_lt(k, beta, l); });
  if (beta == k.mechanism().alpha()) law.with_mean(yaglom_mean(k));
  return law;
}

LimitLaw yaglom_law(const ExtinctionKernel& k) {
  yaglom_lt(k, 1.0);
  LimitLaw law(LawKind::Yaglom, 0.0, [&k](double l) { return yaglom_lt(k, l); });
  law.with_mean(yaglom_mean(k));
  if (auto f = OracleFamily::detect(k.mechanism())) {
    const GammaLaw g = f->yaglom_law();
    law.with_density([g](double x) { return g.density(x); });
  }
  return law;
}

LimitLaw mu_s_law(const ScaleFunction& sf, double s) {
  require_positive(s, "s");
  const ExtinctionKernel& k = sf.kernel();
  LimitLaw law(LawKind::MuS, s, [&k, s](double l) { return mu_s_lt(k, s, l); });
  law.with_density([&sf, s](double x) { return mu_s_density(sf, s, x); });
  law.with_mean(1.0 / (s * k.mechanism().psi(k.varphi(s))));
  return law;
}

LimitLaw ws_law(const ExtinctionKernel& k, double s) {
  require_positive(s, "s");
  LimitLaw law(LawKind::Ws, s, [&k, s](double l) { return ws_lt(k, s, l); });
  law.with_mean(ws_mean(k, s));
  if (auto f = OracleFamily::detect(k.mechanism())) {
    const GammaLaw g = f->ws_law(s);
    law.with_density([g](double x) { return g.density(x); });
  }
  return law;
}

LimitLaw vq_law(const ScaleFunction& sf, double q) {
  require_positive(q, "q");
  const ExtinctionKernel& k = sf.kernel();
  LimitLaw law(LawKind::Vq, q, [&k, q](double l) { return vq_lt(k, q, l); });
  law.with_exponent([&k, q](double l) { return vq_laplace_exponent(k, q, l); });
  law.with_levy_density([&sf, q](double x) { return vq_levy_density(sf, q, x) / x; });
  const auto& m = k.mechanism();
  const double v = k.varphi(q);
  law.with_mean(m.psi_prime_minus_alpha(v) / m.psi(v));
  if (auto f = OracleFamily::detect(m)) {
    const GammaLaw g = f->vq_law(q);
    law.with_density([g](double x) { return g.density(x); });
  }
  return law;
}

LimitLaw vinf_law(const ExtinctionKernel& k) {
  require_vinf(k);
  LimitLaw law(LawKind::Vinf, 0.0, [&k](double l) { return vinf_lt(k, l); });
  law.with_exponent([&k](double l) { return vinf_laplace_exponent(k, l); });
  if (auto f = OracleFamily::detect(k.mechanism())) {
    const GammaLaw g = f->vinf_law();
    law.with_density([g](double x) { return g.density(x); });
    law.with_mean(g.mean());
  }
  return law;
}

double size_bias_residual(const LimitLaw& a, const LimitLaw& b, const std::vector<double>& grid) {
  const auto mean = b.mean();
  if (!mean) throw DomainError("size-bias check needs a finite mean for the base law");
  double worst = 0.0;
  for (double l : grid) {
    if (!(l > 0.0)) throw DomainError("size-bias grid must be positive");
    const double h = std::min(1e-4 * (1.0 + l), 0.5 * l);
    const double deriv = (b.laplace(l + h) - b.laplace(l - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(a.laplace(l) + deriv / *mean));
  }
  return worst;
}

bool completely_monotone_on(const std::function<double(double)>& L, const std::vector<double>& grid,
                            double slack) {
  std::vector<double> x = grid;
  std::sort(x.begin(), x.end());
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = L(x[i]);
  for (int order = 1; order <= 3 && d.size() > 1; ++order) {
    std::vector<double> next(d.size() - 1);
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
      next[i] = (d[i + 1] - d[i]) / (x[i + static_cast<std::size_t>(order)] - x[i]);
      const double signed_v = (order % 2 == 1) ? -next[i] : next[i];
      if (signed_v < -slack) return false;
    }
    d = std::move(next);
  }
  return true;
}

}  // namespace cbcond
