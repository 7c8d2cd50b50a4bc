#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rbm/mulfunc.hpp"
#include "rbm/pathsim.hpp"

namespace rbm {

/// F(gamma) = f(gamma_{t_1}, ..., gamma_{t_n}) with analytic per-argument
/// gradients. Gradients are chart vectors (tangential on the hemisphere);
/// frame coordinates are obtained via u_{t_i}^{-1}.
class CylindricalFunction {
 public:
  using EvalFn = std::function<double(std::span<const Point>)>;
  using GradFn = std::function<Vec(int, std::span<const Point>)>;

  CylindricalFunction(std::string name, std::vector<double> times, EvalFn eval, GradFn grad);

  /// Selector grammar (see README): coord:<j>@t=<t> | quad:<j>@t=<t> |
  /// bump:<j>:<center>:<width>@t=<t> | prod:<j>@t=<t1>,<t2> |
  /// mix:<j>@t=<t1>,<t2>,<t3> | const:<c>@t=<t>
  static CylindricalFunction parse(const Geometry& g, const std::string& selector);

  static CylindricalFunction coordinate(const Geometry& g, int j, double t);
  static CylindricalFunction quadratic(const Geometry& g, int j, double t);
  static CylindricalFunction bump(const Geometry& g, int j, double center, double width, double t);
  static CylindricalFunction product(const Geometry& g, int j, double t1, double t2);
  static CylindricalFunction mix3(const Geometry& g, int j, double t1, double t2, double t3);
  static CylindricalFunction constant(double c, double t);
  /// a + b * coordinate j.
  static CylindricalFunction affine(const Geometry& g, int j, double a, double b, double t);

  const std::string& name() const { return name_; }
  const std::vector<double>& times() const { return times_; }
  int n_args() const { return static_cast<int>(times_.size()); }

  double eval(std::span<const Point> args) const { return eval_(args); }
  Vec grad_chart(int i, std::span<const Point> args) const { return grad_(i, args); }

  /// Evaluate F on a simulated path (arguments read at the grid nodes).
  double eval_on(const PathSample& path) const;
  /// v_i = u_{t_i}^{-1} grad_i f, all arguments from the path.
  std::vector<Vec> frame_gradients(const PathSample& path) const;
  std::vector<int> grid_indices(const TimeGrid& grid) const;

 private:
  std::string name_;
  std::vector<double> times_;
  EvalFn eval_;
  GradFn grad_;
};

/// Adapted Cameron-Martin direction: h_0 = 0, derivative hdot in frame
/// coordinates evaluated at the left endpoint of each step. Members with a
/// finite h_norm_bound lie in the bounded class used by the IBP theorem.
struct CameronMartinDirection {
  std::string name;
  bool deterministic = true;
  double h_norm_bound = 0.0;  // bound on ||h||_H (infinity if unbounded)
  std::function<Vec(const StepContext&)> hdot;

  /// zero | linear:<j> | sin:<j> | tanh:<j>:<center> | sgn:<j>:<center>
  static CameronMartinDirection parse(const Geometry& g, const std::string& selector, double horizon);
  static CameronMartinDirection zero(int dim);
  static CameronMartinDirection linear(int dim, int j);
  static CameronMartinDirection sine(int dim, int j, double horizon);
  static CameronMartinDirection tanh_adapted(int dim, int j, double center, double horizon);
  static CameronMartinDirection sgn_adapted(int dim, int j, double center, double horizon);
  static CameronMartinDirection constant(const Vec& rate, double horizon, std::string name = "constant");

  /// Drift functional for the perturbed flow (2.3); scaled by eps in
  /// paired_simulate.
  DriftFn drift() const { return hdot; }
};

/// An H-valued vector stored through its derivative on the grid,
/// h_t = int_0^t g ds.
struct HVector {
  double dt = 0.0;
  std::vector<Vec> deriv;  // g_k, k = 0..n-1

  double norm_sq() const;
  double inner(const HVector& other) const;
};

/// Damped gradient DF: (d/dt DF)_t_k = sum_i 1{t_k < t_i} Q_{t_k,t_i} v_i,
/// computed by one backward sweep over the shared step factors.
HVector damped_gradient(const Geometry& g, const CylindricalFunction& f, const PathSample& path,
                        const MatrixPath& q);

/// D_h F = <DF, h>_H with left-endpoint quadrature.
double directional_derivative(const Geometry& g, const CylindricalFunction& f,
                              const PathSample& path, const CameronMartinDirection& h,
                              const MatrixPath& q);

/// One-path flow difference quotient (F(X^{eps,h}) - F(X)) / eps on common
/// noise.
double flow_difference_quotient(const Geometry& g, const CylindricalFunction& f, const Point& x0,
                                const Frame& u0, const TimeGrid& grid,
                                const CameronMartinDirection& h, double eps, RandomSource rng);

}  // namespace rbm
