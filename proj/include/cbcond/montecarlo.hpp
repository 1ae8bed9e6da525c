#pragma once

// Monte Carlo for CB processes: exact transitions for the oracle families
// psi = l^2 and psi = l + l^2, Lamperti-Euler paths for general mechanisms,
// and estimators of the conditioned laws.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "cbcond/mechanism.hpp"
#include "cbcond/reference.hpp"
#include "cbcond/rng.hpp"

namespace cbcond {

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t n_paths = 100000;
  double dt = 1e-3;
  double eps = 1e-3;
  double horizon = 1e4;
  // 0 means one worker per hardware thread.
  unsigned workers = 1;
};

void validate(const SimConfig& cfg);

struct McEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // 95%
  std::size_t n = 0;
  double ess = 0.0;
  double acceptance_rate = 1.0;
};

struct McDiagnostics {
  // Accepted / proposed in a rejection step.
  double acceptance_rate = 1.0;
  std::size_t draws = 0;       // underlying transition draws
  std::size_t excluded = 0;    // draws outside the conditioning event
  std::size_t unabsorbed = 0;  // paths alive at the horizon
  // P(Z > 0) when draws were made conditionally on survival.
  double p_positive = 1.0;
  // Mean of the raw (unnormalized) importance weights and its half-width.
  std::optional<McEstimate> weight_mean;
};

// Possibly weighted sample of a law on [0, inf).
class EmpiricalLaw {
 public:
  EmpiricalLaw() = default;
  explicit EmpiricalLaw(std::vector<double> values, std::vector<double> weights = {});

  std::size_t size() const { return values_.size(); }
  bool weighted() const { return !weights_.empty(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }

  McEstimate laplace(double lambda) const;
  McEstimate mean() const;
  double ess() const;
  double cdf(double x) const;
  double ks(const std::function<double(double)>& cdf) const;
  // (x, F_n(x)) at k evenly spaced empirical quantiles.
  std::vector<std::pair<double, double>> cdf_points(std::size_t k) const;

  McDiagnostics diagnostics;

 private:
  McEstimate expectation(const std::function<double(double)>& f) const;
  std::vector<double> values_;
  std::vector<double> weights_;
};

// Runs fn(i) for i in [0, n) on cfg.workers threads; results land at index i.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

// One draw of Z_t under P_x.
double sample_transition_exact(const OracleFamily& f, double x, double t, Rng& rng);
// One draw of Z_t given Z_t > 0, and P_x(Z_t > 0).
std::pair<double, double> sample_transition_positive(const OracleFamily& f, double x, double t,
                                                     Rng& rng);
EmpiricalLaw transitions_exact(const OracleFamily& f, double x, double t, const SimConfig& cfg);

struct LampertiPath {
  std::vector<double> times;  // real-time grid
  std::vector<double> clock;  // theta: Levy time elapsed, int_0^t Z_s ds
  std::vector<double> X;      // Levy path at the clock values
  std::vector<double> Z;      // CB path Z_t = X(theta_t)
  // First grid index with Z = 0, when absorbed before the horizon.
  std::optional<std::size_t> absorption_index;
  // Extinction time, interpolated inside the crossing step.
  std::optional<double> zeta;
  // Optional weights M_t / M_0 = Z_t e^{alpha t} / x.
  std::vector<double> martingale;
};

// Euler scheme for X run on the Levy clock dtheta = Z dt: Gaussian part
// with variance (sigma2 + int_0^eps r^2 pi) dtheta, drift
// -(alpha + int_eps^inf r pi) dtheta, compound Poisson jumps >= eps.
// Throws ConfigError when pi_bar(eps) > 1e7.
LampertiPath simulate_lamperti(const BranchingMechanism& m, double x, const SimConfig& cfg,
                               std::uint64_t stream = 0, bool with_martingale = false);

struct LampertiMarginals {
  EmpiricalLaw z_t;
  // Extinction times; +inf for paths alive at the horizon.
  std::vector<double> zeta;
};
LampertiMarginals simulate_lamperti_marginals(const BranchingMechanism& m, double x, double t,
                                              const SimConfig& cfg);

// Z_t given t <= zeta < t + s, by rejection: a survivor z (drawn given
// Z_t > 0) is accepted with probability exp(-z varphi(s)). Throws
// EstimatorError when the acceptance rate of this step falls below 1e-4.
// n_paths counts accepted draws.
EmpiricalLaw mc_near_extinction(const OracleFamily& f, double x, double t, double s,
                                const SimConfig& cfg);

// Z_{t-q} given zeta = t, via weights z exp(-varphi(q) z) on survivors.
// Throws EstimatorError when the ESS is below 100.
EmpiricalLaw mc_fixed_time(const OracleFamily& f, double x, double t, double q,
                           const SimConfig& cfg);

// Z_{zeta-q} on {zeta > q}: zeta drawn from its law, then Z_{zeta-q} from
// its conditional law given zeta.
EmpiricalLaw mc_reverse_from_extinction(const OracleFamily& f, double x, double q,
                                        const SimConfig& cfg);
// Same law from exact transitions on the grid cfg.dt, reading the state q
// before the absorption time. Throws EstimatorError when more than 1% of
// paths are alive at cfg.horizon.
EmpiricalLaw mc_reverse_grid(const OracleFamily& f, double x, double q, const SimConfig& cfg);

// Q-process at t via weights Z_t e^{alpha t} / x. diagnostics.weight_mean
// holds the raw weight average (should be 1).
EmpiricalLaw mc_qprocess(const OracleFamily& f, double x, double t, const SimConfig& cfg);

// Z_t / t given Z_t > 0.
EmpiricalLaw mc_yaglom_rescaled(const OracleFamily& f, double x, double t, const SimConfig& cfg);

}  // namespace cbcond
