#include "rbm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbm {

double CompensatedSum::value() const { return sum_ + carry_; }

void CompensatedSum::add(double x) {
  // Neumaier variant of Kahan summation.
  double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

Estimate estimate_from(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("estimate_from: need n >= 2");
  const auto n = static_cast<double>(xs.size());
  const double mean = compensated_sum(xs) / n;
  CompensatedSum ss;
  for (double x : xs) {
    const double d = x - mean;
    ss.add(d * d);
  }
  const double var = ss.value() / (n - 1.0);
  return Estimate{mean, std::sqrt(var / n), static_cast<std::int64_t>(xs.size())};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_statistic_weighted_two_sample(std::span<const double> xs, std::span<const double> ws,
                                        std::span<const double> ys) {
  if (xs.size() != ws.size()) throw std::invalid_argument("ks: weight size mismatch");
  if (xs.empty() || ys.empty()) throw std::invalid_argument("ks: empty sample");
  std::vector<std::size_t> ox(xs.size());
  for (std::size_t i = 0; i < ox.size(); ++i) ox[i] = i;
  std::sort(ox.begin(), ox.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> sy(ys.begin(), ys.end());
  std::sort(sy.begin(), sy.end());

  double wtot = 0.0;
  for (double w : ws) wtot += w;

  // Sweep the pooled order, tracking both empirical CDFs.
  double d = 0.0;
  double fw = 0.0;
  std::size_t i = 0, j = 0;
  while (i < ox.size() || j < sy.size()) {
    double t;
    if (j >= sy.size() || (i < ox.size() && xs[ox[i]] <= sy[j])) {
      t = xs[ox[i]];
    } else {
      t = sy[j];
    }
    while (i < ox.size() && xs[ox[i]] <= t) fw += ws[ox[i++]];
    while (j < sy.size() && sy[j] <= t) ++j;
    const double fy = static_cast<double>(j) / static_cast<double>(sy.size());
    d = std::max(d, std::abs(fw / wtot - fy));
  }
  return d;
}

double effective_sample_size(std::span<const double> ws) {
  double s = 0.0, s2 = 0.0;
  for (double w : ws) {
    s += w;
    s2 += w * w;
  }
  if (s2 <= 0.0) return 0.0;
  return s * s / s2;
}

}  // namespace rbm
