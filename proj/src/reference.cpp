#include "cbcond/reference.hpp"

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "cbcond/errors.hpp"

namespace cbcond {

double GammaLaw::laplace(double lambda) const { return std::pow(rate / (rate + lambda), shape); }

double GammaLaw::density(double x) const {
  if (!(x > 0.0)) return 0.0;
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                  boost::math::lgamma(shape));
}

double GammaLaw::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  return boost::math::gamma_p(shape, rate * x);
}

OracleFamily OracleFamily::stable(double beta) {
  if (!(beta > 1.0 && beta <= 2.0)) throw ConfigError("stable oracle needs beta in (1, 2]");
  return {Id::Stable, beta};
}

OracleFamily OracleFamily::linear_plus_quadratic() { return {Id::LinearPlusQuadratic, 2.0}; }

OracleFamily OracleFamily::parse(const std::string& name) {
  const ClosedForm cf = ClosedForm::parse(name);
  if (cf.kind == ClosedForm::Kind::LinearPlusQuadratic) return linear_plus_quadratic();
  return stable(cf.beta);
}

std::optional<OracleFamily> OracleFamily::detect(const BranchingMechanism& m) {
  if (const auto& cf = m.closed_form()) {
    if (cf->kind == ClosedForm::Kind::LinearPlusQuadratic) return linear_plus_quadratic();
    return stable(cf->beta);
  }
  const LevyMeasure& levy = m.levy();
  if (levy.is_none() && m.sigma2() == 2.0) {
    if (m.alpha() == 0.0) return quadratic();
    if (m.alpha() == 1.0) return linear_plus_quadratic();
    return std::nullopt;
  }
  if (const auto* p = levy.power_law_params(); p && m.alpha() == 0.0 && m.sigma2() == 0.0) {
    const double b = p->a;
    const double c = b * (b - 1.0) / std::tgamma(2.0 - b);
    if (std::abs(p->c - c) <= 1e-12 * c) return stable(b);
  }
  return std::nullopt;
}

std::string OracleFamily::name() const {
  if (id_ == Id::LinearPlusQuadratic) return "linear_plus_quadratic";
  if (beta_ == 2.0) return "quadratic";
  return ClosedForm::stable(beta_).name();
}

BranchingMechanism OracleFamily::mechanism() const {
  if (id_ == Id::LinearPlusQuadratic) {
    return BranchingMechanism::from_closed_form(ClosedForm::linear_plus_quadratic());
  }
  if (beta_ == 2.0) return BranchingMechanism::from_closed_form(ClosedForm::quadratic());
  return BranchingMechanism::from_closed_form(ClosedForm::stable(beta_));
}

double OracleFamily::psi(double l) const {
  if (id_ == Id::LinearPlusQuadratic) return l + l * l;
  return std::pow(l, beta_);
}

double OracleFamily::psi_prime(double l) const {
  if (id_ == Id::LinearPlusQuadratic) return 1.0 + 2.0 * l;
  return beta_ * std::pow(l, beta_ - 1.0);
}

double OracleFamily::phi(double l) const {
  if (id_ == Id::LinearPlusQuadratic) return std::log1p(1.0 / l);
  return std::pow(l, 1.0 - beta_) / (beta_ - 1.0);
}

double OracleFamily::varphi(double t) const {
  if (id_ == Id::LinearPlusQuadratic) return 1.0 / std::expm1(t);
  return std::pow((beta_ - 1.0) * t, -1.0 / (beta_ - 1.0));
}

double OracleFamily::u_t(double t, double l) const {
  if (t == 0.0) return l;
  if (id_ == Id::LinearPlusQuadratic) return l / (std::exp(t) + l * std::expm1(t));
  return std::pow(std::pow(l, 1.0 - beta_) + (beta_ - 1.0) * t, -1.0 / (beta_ - 1.0));
}

double OracleFamily::W(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (id_ == Id::LinearPlusQuadratic) return -std::expm1(-x);
  return std::pow(x, beta_ - 1.0) / boost::math::tgamma(beta_);
}

double OracleFamily::W_prime(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (id_ == Id::LinearPlusQuadratic) return std::exp(-x);
  return std::pow(x, beta_ - 2.0) / boost::math::tgamma(beta_ - 1.0);
}

namespace {

void require_subcritical(const OracleFamily& f, const char* what) {
  if (f.critical()) {
    throw DomainError(std::string(what) + " is not defined for the critical family " + f.name());
  }
}

}  // namespace

GammaLaw OracleFamily::yaglom_law() const {
  require_subcritical(*this, "the Yaglom law");
  return {1.0, 1.0};
}

GammaLaw OracleFamily::vinf_law() const {
  require_subcritical(*this, "V_inf");
  return {1.0, 2.0};
}

GammaLaw OracleFamily::ws_law(double s) const {
  if (id_ == Id::LinearPlusQuadratic) return {1.0 + varphi(s), 1.0};
  return {varphi(s), beta_ - 1.0};
}

GammaLaw OracleFamily::vq_law(double q) const {
  if (id_ == Id::LinearPlusQuadratic) return {1.0 + varphi(q), 2.0};
  return {varphi(q), beta_};
}

double OracleFamily::yaglom_lt(double l) const { return yaglom_law().laplace(l); }
double OracleFamily::ws_lt(double s, double l) const { return ws_law(s).laplace(l); }
double OracleFamily::vq_lt(double q, double l) const { return vq_law(q).laplace(l); }
double OracleFamily::vinf_lt(double l) const { return vinf_law().laplace(l); }

double OracleFamily::vq_exponent(double q, double l) const {
  const GammaLaw g = vq_law(q);
  return g.shape * std::log1p(l / g.rate);
}

bool OracleFamily::has_cluster_decomposition() const {
  return id_ == Id::LinearPlusQuadratic || beta_ == 2.0;
}

double OracleFamily::cluster_mean(double t) const {
  if (!has_cluster_decomposition()) {
    throw DomainError("no exact cluster decomposition for " + name());
  }
  if (id_ == Id::LinearPlusQuadratic) return -std::expm1(-t);
  return t;
}

const std::vector<std::string>& oracle_quantities() {
  static const std::vector<std::string> q{"psi",       "psi_prime", "phi",   "varphi",
                                          "ut",        "W",         "Wprime", "yaglom_lt",
                                          "ws_lt",     "vq_lt",     "vinf_lt"};
  return q;
}

double oracle_eval(const OracleFamily& f, const std::string& quantity,
                   const std::vector<double>& args) {
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw ConfigError("oracle quantity '" + quantity + "' takes " + std::to_string(n) +
                        " argument(s), got " + std::to_string(args.size()));
    }
  };
  if (quantity == "psi") return need(1), f.psi(args[0]);
  if (quantity == "psi_prime") return need(1), f.psi_prime(args[0]);
  if (quantity == "phi") return need(1), f.phi(args[0]);
  if (quantity == "varphi") return need(1), f.varphi(args[0]);
  if (quantity == "ut") return need(2), f.u_t(args[0], args[1]);
  if (quantity == "W") return need(1), f.W(args[0]);
  if (quantity == "Wprime") return need(1), f.W_prime(args[0]);
  if (quantity == "yaglom_lt") return need(1), f.yaglom_lt(args[0]);
  if (quantity == "ws_lt") return need(2), f.ws_lt(args[0], args[1]);
  if (quantity == "vq_lt") return need(2), f.vq_lt(args[0], args[1]);
  if (quantity == "vinf_lt") return need(1), f.vinf_lt(args[0]);
  throw ConfigError("unknown oracle quantity '" + quantity + "'");
}

}  // namespace cbcond
