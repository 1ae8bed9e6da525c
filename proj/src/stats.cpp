#include "cbcond/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cbcond/errors.hpp"

namespace cbcond {

MeanEstimate mean_estimate(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  if (values.size() < 2) throw EstimatorError("mean estimate needs at least two samples");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = ss / (n - 1.0);
  return {mean, kZ95 * std::sqrt(var / n), n};
}

MeanEstimate weighted_mean(const std::vector<double>& f, const std::vector<double>& w) {
  if (f.size() != w.size() || f.empty()) throw EstimatorError("weighted mean: size mismatch");
  double sw = 0.0;
  double swf = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sw += w[i];
    swf += w[i] * f[i];
  }
  if (!(sw > 0.0)) throw EstimatorError("weighted mean: all weights vanish");
  const double mean = swf / sw;
  double s2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = w[i] * (f[i] - mean);
    s2 += d * d;
  }
  return {mean, kZ95 * std::sqrt(s2) / sw, effective_sample_size(w)};
}

double effective_sample_size(const std::vector<double>& w) {
  double s = 0.0;
  double s2 = 0.0;
  for (double v : w) {
    s += v;
    s2 += v * v;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw EstimatorError("KS distance of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

double ks_distance_weighted(const std::vector<double>& x, const std::vector<double>& w,
                            const std::function<double(double)>& cdf) {
  if (x.size() != w.size() || x.empty()) throw EstimatorError("weighted KS: size mismatch");
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw EstimatorError("weighted KS: all weights vanish");
  double below = 0.0;
  double d = 0.0;
  for (std::size_t j = 0; j < idx.size();) {
    const double v = x[idx[j]];
    const double F = cdf(v);
    d = std::max(d, F - below / total);
    while (j < idx.size() && x[idx[j]] == v) below += w[idx[j++]];
    d = std::max(d, below / total - F);
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw EstimatorError("two-sample KS with an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace cbcond
