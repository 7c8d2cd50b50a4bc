#include <doctest.h>

#include <cmath>

#include "rbm/linalg.hpp"
#include "rbm/rng.hpp"
#include "rbm/stats.hpp"

using namespace rbm;

TEST_CASE("expm_symmetric matches series for small symmetric matrices") {
  Mat a(2, 2);
  a << -0.3, 0.1, 0.1, -0.7;
  // Truncated series reference.
  Mat ref = Mat::Identity(2, 2);
  Mat term = Mat::Identity(2, 2);
  for (int k = 1; k < 30; ++k) {
    term = Mat(term * a) / k;
    ref += term;
  }
  const Mat e = expm_symmetric(a);
  CHECK((e - ref).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("expm_symmetric handles the stiff rank-one penalization exactly") {
  // G = -(dl/eps) v v^T: expm = I + (exp(-dl/eps) - 1) v v^T.
  Vec v(2);
  v << 1.0, 0.0;
  const double a = 500.0;
  const Mat e = expm_symmetric(Mat(-a * v * v.transpose()));
  CHECK(e(0, 0) == doctest::Approx(std::exp(-a)).epsilon(1e-12));
  CHECK(e(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(e(0, 1)) < 1e-15);
}

TEST_CASE("operator norm of a rotation-scaled matrix") {
  Mat a(2, 2);
  const double th = 0.7;
  a << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  CHECK(operator_norm(Mat(3.0 * a)) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("counter-based stream is a pure function and streams are distinct") {
  const GaussianStream g1(RandomSource{42, 7});
  const GaussianStream g2(RandomSource{42, 7});
  const GaussianStream g3(RandomSource{42, 8});
  CHECK(g1.normal(3, 1) == g2.normal(3, 1));
  CHECK(g1.normal(3, 0) != g3.normal(3, 0));
  CHECK(g1.normal(3, 0) != g1.normal(4, 0));
}

TEST_CASE("gaussian moments") {
  const GaussianStream gs(RandomSource{123, 0});
  const int n = 200000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = gs.normal(i, 0);
  const Estimate e = estimate_from(xs);
  CHECK(std::abs(e.mean) < 3.5 * e.std_error);
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m2 /= n;
  m4 /= n;
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(m4 == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("compensated summation") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 10; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("one-sample KS against exact uniforms") {
  std::vector<double> xs(4096);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = (i + 0.5) / xs.size();
  const double d = ks_statistic(xs, [](double x) { return x; });
  CHECK(d < 1.0 / 4096 + 1e-12);
}
