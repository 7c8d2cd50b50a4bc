#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rbm {

/// Sample mean with standard error (sample std / sqrt(n)).
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
};

/// Neumaier compensated accumulator; reductions over path ensembles use this
/// serially so results do not depend on thread count.
class CompensatedSum {
 public:
  void add(double x);
  double value() const;

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double compensated_sum(std::span<const double> xs);
Estimate estimate_from(std::span<const double> xs);

double normal_cdf(double x);
double normal_pdf(double x);

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Two-sample KS with importance weights on the first sample.
double ks_statistic_weighted_two_sample(std::span<const double> xs, std::span<const double> ws,
                                        std::span<const double> ys);

/// (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> ws);

/// Asymptotic KS critical value at level alpha for effective sizes (na, nb);
/// pass nb = infinity semantics with nb <= 0 for one-sample use.
inline double ks_critical(double alpha_coeff, double na, double nb) {
  const double inv = nb > 0 ? 1.0 / na + 1.0 / nb : 1.0 / na;
  return alpha_coeff * std::sqrt(inv);
}

/// c(0.01) for the Kolmogorov distribution.
inline constexpr double kKsCoeff1Percent = 1.6276;

}  // namespace rbm
