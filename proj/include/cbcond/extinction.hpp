#pragma once

// Extinction calculus of a CB process with Grey's condition:
//
//   phi(l)    = int_l^inf du / psi(u)          (strictly decreasing)
//   varphi    = phi^{-1}
//   u_t(l)    = varphi(t + phi(l))
//   P_x(zeta <= t) = exp(-x varphi(t))

#include <vector>

#include "cbcond/mechanism.hpp"

namespace cbcond {

struct VarphiValue {
  double value = 0.0;
  // t so small that varphi(t) exceeds the cap; value is the cap.
  bool capped = false;
  // varphi(t) below the smallest normal double; value is that clamp.
  bool underflow = false;
};

class ExtinctionKernel {
 public:
  static constexpr double kVarphiCap = 1e12;

  // Throws ConfigError("non-extinguishing mechanism") when Grey's condition
  // fails. Warms up the phi cache; the kernel is immutable afterwards.
  explicit ExtinctionKernel(BranchingMechanism m, double tol_phi = 1e-9);

  const BranchingMechanism& mechanism() const { return m_; }
  double tol_phi() const { return tol_; }

  // err receives the quadrature error estimate.
  double phi(double lambda, double* err = nullptr) const;
  // phi(exp(log_lambda)); usable far below the double range of lambda.
  double phi_log(double log_lambda, double* err = nullptr) const;

  double varphi(double t) const { return varphi_checked(t).value; }
  VarphiValue varphi_checked(double t) const;
  // |phi(varphi(t)) - t| psi(varphi(t)), the first-order error in varphi.
  double varphi_error(double t) const;
  // log varphi(t), exact even where varphi itself underflows.
  double log_varphi(double t) const;
  // varphi(t + s) / varphi(t) computed in log space.
  double varphi_ratio(double t, double s) const;

  double u_t(double t, double lambda) const;
  // u_t(l) by integrating d/dt log u = -psi(u)/u with an adaptive
  // Dormand-Prince scheme; a crosscheck for u_t.
  double u_t_ode(double t, double lambda, double rel_tol = 1e-11) const;

  double extinction_cdf(double x, double t) const;
  double extinction_pdf(double x, double t) const;

 private:
  BranchingMechanism m_;
  double tol_;
  double phi_one_ = 0.0;
  // Monotone table of (log phi, log lambda) used to seed the root finder.
  std::vector<double> cache_log_phi_;
  std::vector<double> cache_log_lambda_;
  std::vector<double> cache_slope_;

  double seed_log_lambda(double log_t, double* lo, double* hi) const;
};

}  // namespace cbcond
