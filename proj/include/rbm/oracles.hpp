#pragma once

#include <functional>
#include <string>

#include "rbm/pathsim.hpp"

namespace rbm {

/// Neumann heat kernel reference for the 1D geometries, via the method of
/// images. Image truncation is chosen at runtime from the Gaussian tail.
struct KernelSpec {
  GeomKind geometry = GeomKind::HalfLine;  // HalfLine or Interval only

  static KernelSpec halfline() { return KernelSpec{GeomKind::HalfLine}; }
  static KernelSpec interval() { return KernelSpec{GeomKind::Interval}; }
  double upper() const { return geometry == GeomKind::Interval ? 1.0 : 0.0; }
};

/// 1D test function with analytic derivative; `name` keys closed-form
/// semigroup gradients ("coord", "quad"), everything else goes through
/// adaptive quadrature.
struct ScalarFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;

  static ScalarFunction coordinate();           // f(y) = y
  static ScalarFunction quadratic();            // f(y) = y^2
  static ScalarFunction bump(double c, double w);
  static ScalarFunction constant(double c);
  static ScalarFunction parse(const std::string& selector);
};

/// Transition density of the reflecting Brownian motion (generator Laplace/2).
double neumann_kernel(const KernelSpec& spec, double t, double x, double y);
/// CDF in y of the kernel (for Kolmogorov-Smirnov marginal checks).
double neumann_kernel_cdf(const KernelSpec& spec, double t, double x, double y);
/// P_t f(x) by kernel quadrature (closed forms where available).
double neumann_value(const KernelSpec& spec, double t, double x, const ScalarFunction& f);
/// d/dx P_t f(x), differentiating the kernel under the integral.
double neumann_gradient(const KernelSpec& spec, double t, double x, const ScalarFunction& f);

/// Exact reflected path on the half-line: X = |b| on the grid, local time by
/// the Tanaka sum l_k = |b_k| - sum_{j<k} sgn(b_j) db_j with sgn(0) = +1.
PathSample exact_reflected_path_1d(const TimeGrid& grid, RandomSource rng);

/// Remark-style explicit 1D Q_{s,t}: 1 if no local time accrues in (s,t],
/// else 0.
double explicit_q_1d(const PathSample& path, int s, int t);

/// Common-driver mirror realization of the quasi-invariant flow in 1D:
/// X = fold(bhat), X^{eps,h} = fold(bhat + eps h) with fold = |.| on the
/// half-line and the tent map on the interval. This is the realization whose
/// pathwise difference quotients exhibit the sign flips of the flow (the
/// projection coupling is monotone and cannot). Boundary contacts of the base
/// path are crease crossings of bhat, sampled with exact Brownian-bridge
/// probabilities, so contact times are exact in law at grid resolution.
struct MirrorFlowPair {
  std::vector<double> bhat;      // unfolded driver, n+1 nodes
  std::vector<double> base;      // fold(bhat)
  std::vector<double> pert;      // fold(bhat + eps h)
  std::vector<std::uint8_t> crossing;  // crossing[k]: contact in (t_{k-1}, t_k]
  int last_crossing = 0;         // right node of the last contact interval, 0 if none
};
MirrorFlowPair mirror_flow_pair_1d(GeomKind kind, const TimeGrid& grid,
                                   const std::function<double(double)>& hdot, double eps,
                                   RandomSource rng, double x0 = 0.0);

/// E|B_1| = sqrt(2/pi), the local-time calibration constant.
inline constexpr double kMeanLocalTimeHalfLine = 0.79788456080286535588;

}  // namespace rbm
