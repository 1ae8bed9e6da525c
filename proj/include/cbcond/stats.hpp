#pragma once

#include <functional>
#include <vector>

namespace cbcond {

// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct MeanEstimate {
  double mean = 0.0;
  double half_width = 0.0;
  double n = 0.0;
};

// Sample mean with a 95% half-width from the sample variance.
MeanEstimate mean_estimate(const std::vector<double>& values);

// Self-normalized weighted mean sum w f / sum w, with the delta-method
// half-width.
MeanEstimate weighted_mean(const std::vector<double>& f, const std::vector<double>& w);

// Kish effective sample size (sum w)^2 / sum w^2.
double effective_sample_size(const std::vector<double>& w);

// sup |F_n - F| for a sample (sorted internally).
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);
// Weighted version: F_n puts mass w_i / sum w on x_i.
double ks_distance_weighted(const std::vector<double>& x, const std::vector<double>& w,
                            const std::function<double(double)>& cdf);
// sup |F_n - G_m| with ties handled.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace cbcond
