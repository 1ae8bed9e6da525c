#include "cbcond/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "cbcond/errors.hpp"
#include "cbcond/stats.hpp"

namespace cbcond {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxJumpRate = 1e7;
constexpr std::uint64_t kPilotStream = 0x8000000000000000ULL;

void require_cluster(const OracleFamily& f) {
  if (!f.has_cluster_decomposition()) {
    throw ConfigError("exact transition sampling supports only quadratic and linear_plus_quadratic; "
                      "use simulate_lamperti for " + f.name());
  }
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
}

std::uint64_t poisson(double mu, Rng& rng) {
  if (!(mu > 0.0)) return 0;
  std::poisson_distribution<std::uint64_t> d(mu);
  return d(rng);
}

// Poisson(mu) conditioned on being >= 1.
std::uint64_t poisson_positive(double mu, Rng& rng) {
  if (mu < 1.0) {
    const double target = rng.uniform() * -std::expm1(-mu);
    std::uint64_t k = 1;
    double term = std::exp(-mu) * mu;
    double acc = term;
    while (acc < target && k < 1000) {
      ++k;
      term *= mu / static_cast<double>(k);
      acc += term;
    }
    return k;
  }
  for (;;) {
    const std::uint64_t k = poisson(mu, rng);
    if (k > 0) return k;
  }
}

double gamma_sum(std::uint64_t shape, double scale, Rng& rng) {
  if (shape == 0) return 0.0;
  std::gamma_distribution<double> g(static_cast<double>(shape), scale);
  return g(rng);
}

unsigned resolve_workers(unsigned w) {
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  return w;
}

}  // namespace

void validate(const SimConfig& cfg) {
  if (cfg.n_paths < 2) throw ConfigError("n_paths must be at least 2");
  require_positive(cfg.dt, "dt");
  require_positive(cfg.eps, "eps");
  require_positive(cfg.horizon, "horizon");
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = resolve_workers(workers);
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  constexpr std::size_t kChunk = 256;
  auto work = [&] {
    for (;;) {
      const std::size_t lo = next.fetch_add(kChunk);
      if (lo >= n) return;
      const std::size_t hi = std::min(n, lo + kChunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < workers; ++k) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// EmpiricalLaw

EmpiricalLaw::EmpiricalLaw(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  if (!weights_.empty() && weights_.size() != values_.size()) {
    throw EstimatorError("empirical law: values and weights differ in length");
  }
}

McEstimate EmpiricalLaw::expectation(const std::function<double(double)>& f) const {
  std::vector<double> fv(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) fv[i] = f(values_[i]);
  MeanEstimate m = weighted() ? weighted_mean(fv, weights_) : mean_estimate(fv);
  McEstimate e;
  e.estimate = m.mean;
  e.half_width = m.half_width;
  e.n = values_.size();
  e.ess = weighted() ? m.n : static_cast<double>(values_.size());
  e.acceptance_rate = diagnostics.acceptance_rate;
  return e;
}

McEstimate EmpiricalLaw::laplace(double lambda) const {
  return expectation([lambda](double z) { return std::exp(-lambda * z); });
}

McEstimate EmpiricalLaw::mean() const {
  return expectation([](double z) { return z; });
}

double EmpiricalLaw::ess() const {
  return weighted() ? effective_sample_size(weights_) : static_cast<double>(values_.size());
}

double EmpiricalLaw::cdf(double x) const {
  double below = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double w = weighted() ? weights_[i] : 1.0;
    total += w;
    if (values_[i] <= x) below += w;
  }
  return total > 0.0 ? below / total : 0.0;
}

double EmpiricalLaw::ks(const std::function<double(double)>& cdf) const {
  if (weighted()) return ks_distance_weighted(values_, weights_, cdf);
  return ks_distance(values_, cdf);
}

std::vector<std::pair<double, double>> EmpiricalLaw::cdf_points(std::size_t k) const {
  std::vector<std::pair<double, double>> out;
  if (values_.empty() || k == 0) return out;
  std::vector<std::size_t> idx(values_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return values_[a] < values_[b]; });
  std::vector<double> cum(idx.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    acc += weighted() ? weights_[idx[j]] : 1.0;
    cum[j] = acc;
  }
  for (std::size_t i = 1; i <= k; ++i) {
    const double level = acc * static_cast<double>(i) / static_cast<double>(k);
    auto it = std::lower_bound(cum.begin(), cum.end(), level * (1.0 - 1e-12));
    if (it == cum.end()) it = std::prev(cum.end());
    const std::size_t j = static_cast<std::size_t>(it - cum.begin());
    out.emplace_back(values_[idx[j]], cum[j] / acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact transitions

double sample_transition_exact(const OracleFamily& f, double x, double t, Rng& rng) {
  require_cluster(f);
  if (t == 0.0) return x;
  const std::uint64_t n = poisson(x * f.varphi(t), rng);
  return gamma_sum(n, f.cluster_mean(t), rng);
}

std::pair<double, double> sample_transition_positive(const OracleFamily& f, double x, double t,
                                                     Rng& rng) {
  require_cluster(f);
  const double mu = x * f.varphi(t);
  const std::uint64_t n = poisson_positive(mu, rng);
  return {gamma_sum(n, f.cluster_mean(t), rng), -std::expm1(-mu)};
}

EmpiricalLaw transitions_exact(const OracleFamily& f, double x, double t, const SimConfig& cfg) {
  validate(cfg);
  require_cluster(f);
  require_positive(x, "x");
  std::vector<double> z(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    z[i] = sample_transition_exact(f, x, t, rng);
  });
  EmpiricalLaw law(std::move(z));
  law.diagnostics.draws = cfg.n_paths;
  return law;
}

// ---------------------------------------------------------------------------
// Lamperti-Euler

namespace {

struct EulerCoefficients {
  double drift = 0.0;     // per unit Levy time, the sign included
  double variance = 0.0;  // per unit Levy time
  double jump_rate = 0.0;
  std::optional<JumpSampler> jumps;
};

EulerCoefficients euler_coefficients(const BranchingMechanism& m, const SimConfig& cfg) {
  validate(cfg);
  EulerCoefficients c;
  c.drift = -m.alpha();
  c.variance = m.sigma2();
  if (!m.levy().is_none()) {
    c.jumps.emplace(m.levy(), cfg.eps);
    c.jump_rate = c.jumps->rate();
    if (c.jump_rate > kMaxJumpRate) {
      throw ConfigError("small-jump cutoff eps = " + std::to_string(cfg.eps) +
                        " gives a jump rate " + std::to_string(c.jump_rate) +
                        " above 1e7 per unit time; increase eps");
    }
    c.drift -= m.levy().mean_above(cfg.eps);
    c.variance += m.levy().second_moment_below(cfg.eps);
  }
  return c;
}

// One Euler step of real length dt from z > 0; returns the new value,
// possibly <= 0.
double euler_step(const EulerCoefficients& c, double z, double dt, Rng& rng) {
  const double ds = z * dt;
  double next = z + c.drift * ds;
  if (c.variance > 0.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    next += std::sqrt(c.variance * ds) * g(rng);
  }
  if (c.jumps) {
    const std::uint64_t k = poisson(c.jump_rate * ds, rng);
    for (std::uint64_t j = 0; j < k; ++j) next += c.jumps->sample(rng.uniform());
  }
  return next;
}

}  // namespace

LampertiPath simulate_lamperti(const BranchingMechanism& m, double x, const SimConfig& cfg,
                               std::uint64_t stream, bool with_martingale) {
  require_positive(x, "x");
  const EulerCoefficients c = euler_coefficients(m, cfg);
  Rng rng(cfg.seed, stream);
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt));
  LampertiPath p;
  p.times.reserve(steps + 1);
  double z = x;
  double theta = 0.0;
  p.times.push_back(0.0);
  p.clock.push_back(0.0);
  p.X.push_back(x);
  p.Z.push_back(x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    double next = 0.0;
    if (z > 0.0) {
      next = euler_step(c, z, cfg.dt, rng);
      theta += z * cfg.dt;
      if (next <= 0.0) {
        p.zeta = t + cfg.dt * z / (z - next);
        p.absorption_index = k + 1;
        // X is recorded at the crossing; the CB path stays at 0.
        p.X.push_back(next);
        next = 0.0;
      } else {
        p.X.push_back(next);
      }
    } else {
      p.X.push_back(p.X.back());
    }
    z = next;
    p.times.push_back(static_cast<double>(k + 1) * cfg.dt);
    p.clock.push_back(theta);
    p.Z.push_back(z);
  }
  if (with_martingale) {
    p.martingale.resize(p.Z.size());
    for (std::size_t i = 0; i < p.Z.size(); ++i) {
      p.martingale[i] = p.Z[i] * std::exp(m.alpha() * p.times[i]) / x;
    }
  }
  return p;
}

LampertiMarginals simulate_lamperti_marginals(const BranchingMechanism& m, double x, double t,
                                              const SimConfig& cfg) {
  require_positive(x, "x");
  require_positive(t, "t");
  const EulerCoefficients c = euler_coefficients(m, cfg);
  const auto steps = static_cast<std::size_t>(std::llround(t / cfg.dt));
  std::vector<double> z_t(cfg.n_paths);
  std::vector<double> zeta(cfg.n_paths, kInf);
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    double z = x;
    for (std::size_t k = 0; k < steps; ++k) {
      const double next = euler_step(c, z, cfg.dt, rng);
      if (next <= 0.0) {
        zeta[i] = (static_cast<double>(k) + z / (z - next)) * cfg.dt;
        z = 0.0;
        break;
      }
      z = next;
    }
    z_t[i] = z;
  });
  LampertiMarginals out{EmpiricalLaw(std::move(z_t)), std::move(zeta)};
  out.z_t.diagnostics.draws = cfg.n_paths;
  return out;
}

// ---------------------------------------------------------------------------
// Conditioned estimators

EmpiricalLaw mc_near_extinction(const OracleFamily& f, double x, double t, double s,
                                const SimConfig& cfg) {
  validate(cfg);
  require_cluster(f);
  require_positive(x, "x");
  require_positive(t, "t");
  require_positive(s, "s");
  const double v = f.varphi(s);

  // Pilot run for the acceptance guard.
  constexpr int kPilot = 2000;
  int accepted = 0;
  double p_pos = 0.0;
  for (int j = 0; j < kPilot; ++j) {
    Rng rng(cfg.seed, kPilotStream + static_cast<std::uint64_t>(j));
    auto [z, pp] = sample_transition_positive(f, x, t, rng);
    p_pos = pp;
    if (rng.uniform() < std::exp(-z * v)) ++accepted;
  }
  const double pilot_rate = static_cast<double>(std::max(accepted, 1)) / kPilot;
  if (pilot_rate < 1e-4) {
    throw EstimatorError("near-extinction acceptance rate " + std::to_string(pilot_rate) +
                         " below 1e-4; increase t or s");
  }

  std::vector<double> z(cfg.n_paths);
  std::vector<std::size_t> attempts(cfg.n_paths, 0);
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    for (;;) {
      ++attempts[i];
      const double zi = sample_transition_positive(f, x, t, rng).first;
      if (rng.uniform() < std::exp(-zi * v)) {
        z[i] = zi;
        return;
      }
    }
  });
  const std::size_t total = std::accumulate(attempts.begin(), attempts.end(), std::size_t{0});
  EmpiricalLaw law(std::move(z));
  law.diagnostics.draws = total;
  law.diagnostics.excluded = total - cfg.n_paths;
  law.diagnostics.p_positive = p_pos;
  law.diagnostics.acceptance_rate =
      static_cast<double>(cfg.n_paths) / static_cast<double>(total);
  if (law.diagnostics.acceptance_rate < 1e-4) {
    throw EstimatorError("near-extinction acceptance rate below 1e-4; increase t or s");
  }
  return law;
}

EmpiricalLaw mc_fixed_time(const OracleFamily& f, double x, double t, double q,
                           const SimConfig& cfg) {
  validate(cfg);
  require_cluster(f);
  require_positive(x, "x");
  require_positive(q, "q");
  if (!(q < t)) throw ConfigError("fixed-time conditioning needs 0 < q < t");
  const double v = f.varphi(q);
  std::vector<double> z(cfg.n_paths);
  std::vector<double> w(cfg.n_paths);
  double p_pos = 0.0;
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    const auto [zi, pp] = sample_transition_positive(f, x, t - q, rng);
    z[i] = zi;
    w[i] = zi * std::exp(-v * zi);
    if (i == 0) p_pos = pp;
  });
  EmpiricalLaw law(std::move(z), std::move(w));
  law.diagnostics.draws = cfg.n_paths;
  law.diagnostics.p_positive = p_pos;
  if (law.ess() < 100.0) {
    throw EstimatorError("fixed-time effective sample size " + std::to_string(law.ess()) +
                         " below 100");
  }
  return law;
}

EmpiricalLaw mc_reverse_from_extinction(const OracleFamily& f, double x, double q,
                                        const SimConfig& cfg) {
  validate(cfg);
  require_cluster(f);
  require_positive(x, "x");
  require_positive(q, "q");
  const double v = f.varphi(q);
  std::vector<double> z(cfg.n_paths, -1.0);
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    // P_x(zeta <= t) = exp(-x varphi(t)).
    const double zeta = f.phi(rng.exponential() / x);
    if (!(zeta > q)) return;
    const double s = zeta - q;
    // Given zeta, Z_s has density proportional to z e^{-v z} P_x(Z_s in dz):
    // tilted clusters plus one size-biased cluster.
    const double rate = 1.0 / f.cluster_mean(s) + v;
    const double keep = (1.0 / f.cluster_mean(s)) / rate;
    const std::uint64_t n = poisson(x * f.varphi(s) * keep, rng);
    z[i] = gamma_sum(n + 2, 1.0 / rate, rng);
  });
  std::vector<double> kept;
  kept.reserve(z.size());
  for (double zi : z) {
    if (zi >= 0.0) kept.push_back(zi);
  }
  const std::size_t excluded = z.size() - kept.size();
  if (kept.size() < 2) throw EstimatorError("reverse-path estimator: almost every path has zeta <= q");
  EmpiricalLaw law(std::move(kept));
  law.diagnostics.draws = cfg.n_paths;
  law.diagnostics.excluded = excluded;
  return law;
}

EmpiricalLaw mc_reverse_grid(const OracleFamily& f, double x, double q, const SimConfig& cfg) {
  validate(cfg);
  require_cluster(f);
  require_positive(x, "x");
  require_positive(q, "q");
  const double lag = q / cfg.dt;
  const auto lag_hi = static_cast<std::size_t>(std::ceil(lag));
  const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt));
  // -1: zeta <= q; -2: alive at the horizon.
  std::vector<double> z(cfg.n_paths, -1.0);
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    std::vector<double> ring(lag_hi + 1, x);
    double cur = x;
    for (std::size_t k = 1; k <= max_steps; ++k) {
      cur = sample_transition_exact(f, cur, cfg.dt, rng);
      ring[k % ring.size()] = cur;
      if (cur == 0.0) {
        const double pos = static_cast<double>(k) - lag;
        if (pos <= 0.0) return;
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        const double a = ring[lo % ring.size()];
        const double b = ring[(lo + 1) % ring.size()];
        z[i] = (1.0 - frac) * a + frac * b;
        return;
      }
    }
    z[i] = -2.0;
  });
  std::vector<double> kept;
  std::size_t excluded = 0;
  std::size_t alive = 0;
  for (double zi : z) {
    if (zi >= 0.0) {
      kept.push_back(zi);
    } else if (zi == -2.0) {
      ++alive;
    } else {
      ++excluded;
    }
  }
  if (static_cast<double>(alive) > 0.01 * static_cast<double>(cfg.n_paths)) {
    throw EstimatorError("reverse-path estimator: " + std::to_string(alive) + " of " +
                         std::to_string(cfg.n_paths) + " paths unabsorbed at the horizon " +
                         std::to_string(cfg.horizon));
  }
  if (kept.size() < 2) throw EstimatorError("reverse-path estimator: too few absorbed paths");
  EmpiricalLaw law(std::move(kept));
  law.diagnostics.draws = cfg.n_paths;
  law.diagnostics.excluded = excluded;
  law.diagnostics.unabsorbed = alive;
  return law;
}

EmpiricalLaw mc_qprocess(const OracleFamily& f, double x, double t, const SimConfig& cfg) {
  validate(cfg);
  require_cluster(f);
  require_positive(x, "x");
  require_positive(t, "t");
  std::vector<double> z(cfg.n_paths);
  std::vector<double> w(cfg.n_paths);
  const double growth = std::exp(f.alpha() * t) / x;
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    const auto [zi, pp] = sample_transition_positive(f, x, t, rng);
    z[i] = zi;
    // Survivors only: P(Z_t > 0) restores the unconditional weight scale.
    w[i] = pp * zi * growth;
  });
  McEstimate wm;
  {
    const MeanEstimate m = mean_estimate(w);
    wm.estimate = m.mean;
    wm.half_width = m.half_width;
    wm.n = w.size();
    wm.ess = static_cast<double>(w.size());
  }
  EmpiricalLaw law(std::move(z), std::move(w));
  law.diagnostics.draws = cfg.n_paths;
  law.diagnostics.p_positive = -std::expm1(-x * f.varphi(t));
  law.diagnostics.weight_mean = wm;
  if (law.ess() < 100.0) {
    throw EstimatorError("Q-process effective sample size " + std::to_string(law.ess()) +
                         " below 100");
  }
  return law;
}

EmpiricalLaw mc_yaglom_rescaled(const OracleFamily& f, double x, double t, const SimConfig& cfg) {
  validate(cfg);
  require_cluster(f);
  require_positive(x, "x");
  require_positive(t, "t");
  std::vector<double> z(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.workers, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    z[i] = sample_transition_positive(f, x, t, rng).first / t;
  });
  EmpiricalLaw law(std::move(z));
  law.diagnostics.draws = cfg.n_paths;
  law.diagnostics.p_positive = -std::expm1(-x * f.varphi(t));
  return law;
}

}  // namespace cbcond
