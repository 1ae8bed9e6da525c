#pragma once

// Conditional and limit laws at the level of Laplace transforms:
//
//   QSD nu_beta      1 - exp(-beta phi(l))                    (alpha > 0)
//   Yaglom           beta = alpha
//   mu_s             density exp(-varphi(s) x) W(x) / (s x)
//   W_s              limit of Z_t given t <= zeta < t + s
//   V_q              limit of Z_{t-q} given zeta = t
//   V_inf            limit of V_q as q -> inf (Q-process limit)

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cbcond/extinction.hpp"
#include "cbcond/scale.hpp"

namespace cbcond {

enum class LawKind { QSD, Yaglom, MuS, Ws, Vq, Vinf };

const char* to_string(LawKind k);
LawKind parse_law_kind(const std::string& name);

class LimitLaw {
 public:
  LimitLaw(LawKind kind, double param, std::function<double(double)> laplace);

  LawKind kind() const { return kind_; }
  // beta for QSD, s for MuS and Ws, q for Vq; 0 otherwise.
  double param() const { return param_; }

  double laplace(double lambda) const;
  // Laplace exponent -log L(l).
  double exponent(double lambda) const;

  bool has_density() const { return static_cast<bool>(density_); }
  double density(double x) const;
  // nullopt when the mean is infinite or unknown.
  std::optional<double> mean() const { return mean_; }
  // Levy density v(x)/x with drift 0, for the infinitely divisible kinds.
  bool has_levy_density() const { return static_cast<bool>(levy_); }
  double levy_density(double x) const;

  LimitLaw& with_density(std::function<double(double)> f);
  LimitLaw& with_mean(std::optional<double> m);
  LimitLaw& with_exponent(std::function<double(double)> f);
  LimitLaw& with_levy_density(std::function<double(double)> f);

 private:
  LawKind kind_;
  double param_;
  std::function<double(double)> laplace_;
  std::function<double(double)> exponent_;
  std::function<double(double)> density_;
  std::function<double(double)> levy_;
  std::optional<double> mean_;
};

double qsd_lt(const ExtinctionKernel& k, double beta, double lambda);
double yaglom_lt(const ExtinctionKernel& k, double lambda);
// E[Theta]; nullopt (infinite) when x log x fails.
std::optional<double> yaglom_mean(const ExtinctionKernel& k);

double mu_s_density(const ScaleFunction& sf, double s, double x);
double mu_s_lt(const ExtinctionKernel& k, double s, double lambda);

double ws_lt(const ExtinctionKernel& k, double s, double lambda);
double ws_mean(const ExtinctionKernel& k, double s);

double vq_laplace_exponent(const ExtinctionKernel& k, double q, double lambda);
// int_{v}^{l+v} (psi'(u) - alpha) / psi(u) du with v = varphi(q).
double vq_laplace_exponent_integral(const ExtinctionKernel& k, double q, double lambda);
double vq_lt(const ExtinctionKernel& k, double q, double lambda);
// v_q(x); the Levy measure of V_q is v_q(x)/x dx.
double vq_levy_density(const ScaleFunction& sf, double q, double x);

bool vinf_exists(const BranchingMechanism& m);
double vinf_laplace_exponent(const ExtinctionKernel& k, double lambda);
double vinf_laplace_exponent_integral(const ExtinctionKernel& k, double lambda);
double vinf_lt(const ExtinctionKernel& k, double lambda);

// Limit of E_x[exp(-l Z_{zeta-q}); zeta > q] as x -> inf:
// psi(varphi(q)) / psi(l + varphi(q)). Equals the V_q transform exactly when
// alpha = 0; for alpha > 0 it lacks the factor exp(-alpha (phi(l + v) - q)).
double reverse_limit_lt(const ExtinctionKernel& k, double q, double lambda);

// (exp(-x u_t(l)) - exp(-x varphi(t))) / (x psi(varphi(t))), whose t -> inf
// limit is phi(l) (critical) or (1 - exp(-alpha phi(l))) / alpha.
double normalized_transition_transform(const ExtinctionKernel& k, double x, double t,
                                       double lambda);
double normalized_transition_limit(const ExtinctionKernel& k, double lambda);

// E_x[exp(-theta Z_t / t) | Z_t > 0], analytically.
double rescaled_conditional_transform(const ExtinctionKernel& k, double x, double t, double theta);

// The returned laws refer to k / sf, which must outlive them.
LimitLaw qsd_law(const ExtinctionKernel& k, double beta);
LimitLaw yaglom_law(const ExtinctionKernel& k);
LimitLaw mu_s_law(const ScaleFunction& sf, double s);
LimitLaw ws_law(const ExtinctionKernel& k, double s);
LimitLaw vq_law(const ScaleFunction& sf, double q);
LimitLaw vinf_law(const ExtinctionKernel& k);

// sup over the grid of |L_A(l) + L_B'(l) / E_B|, zero when A is the size
// bias of B. L_B' by central differences with h = 1e-4 (1 + l).
double size_bias_residual(const LimitLaw& a, const LimitLaw& b, const std::vector<double>& grid);

// Finite differences of L on the grid alternate in sign up to order 3.
bool completely_monotone_on(const std::function<double(double)>& L, const std::vector<double>& grid,
                            double slack = 1e-12);

}  // namespace cbcond
