#pragma once

// Closed-form oracle families: psi(l) = l^beta (1 < beta <= 2) and
// psi(l) = l + l^2.

#include <optional>
#include <string>
#include <vector>

#include "cbcond/mechanism.hpp"

namespace cbcond {

// Gamma(rate, shape) law, as used for W_s, V_q and V_inf.
struct GammaLaw {
  double rate = 1.0;
  double shape = 1.0;
  double laplace(double lambda) const;
  double mean() const { return shape / rate; }
  double density(double x) const;
  double cdf(double x) const;
};

class OracleFamily {
 public:
  enum class Id { Stable, LinearPlusQuadratic };

  static OracleFamily stable(double beta);
  static OracleFamily quadratic() { return stable(2.0); }
  static OracleFamily linear_plus_quadratic();
  // "stable(<beta>)", "quadratic" or "linear_plus_quadratic".
  static OracleFamily parse(const std::string& name);
  // The family a mechanism belongs to, from its closed form or its triplet.
  static std::optional<OracleFamily> detect(const BranchingMechanism& m);

  Id id() const { return id_; }
  double beta() const { return beta_; }
  double alpha() const { return id_ == Id::LinearPlusQuadratic ? 1.0 : 0.0; }
  bool critical() const { return id_ == Id::Stable; }
  std::string name() const;
  BranchingMechanism mechanism() const;

  double psi(double lambda) const;
  double psi_prime(double lambda) const;
  double phi(double lambda) const;
  double varphi(double t) const;
  double u_t(double t, double lambda) const;
  double W(double x) const;
  double W_prime(double x) const;

  // Throws DomainError for critical families.
  double yaglom_lt(double lambda) const;
  double ws_lt(double s, double lambda) const;
  double vq_lt(double q, double lambda) const;
  double vq_exponent(double q, double lambda) const;
  // Throws DomainError when V_inf is degenerate (critical families).
  double vinf_lt(double lambda) const;

  GammaLaw ws_law(double s) const;
  GammaLaw vq_law(double q) const;
  GammaLaw yaglom_law() const;
  GammaLaw vinf_law() const;

  // Exact transition sampling applies (beta = 2 or l + l^2): Z_t is a
  // Poisson(x varphi(t)) sum of exponentials with this mean.
  bool has_cluster_decomposition() const;
  double cluster_mean(double t) const;

 private:
  OracleFamily(Id id, double beta) : id_(id), beta_(beta) {}
  Id id_;
  double beta_;
};

// Quantities: psi, psi_prime, phi, varphi, ut, W, Wprime, yaglom_lt, ws_lt,
// vq_lt, vinf_lt. Arguments in the order (t | x | s | q)[, lambda].
double oracle_eval(const OracleFamily& f, const std::string& quantity,
                   const std::vector<double>& args);
const std::vector<std::string>& oracle_quantities();

}  // namespace cbcond
