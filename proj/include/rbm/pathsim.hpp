#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rbm/geometry.hpp"
#include "rbm/rng.hpp"

namespace rbm {

/// Uniform grid on [0, T].
struct TimeGrid {
  double horizon = 1.0;
  int n_steps = 1;

  double dt() const { return horizon / n_steps; }
  double time(int k) const { return k * dt(); }
  /// Grid index of t; throws if t is off the grid (tolerance 1e-9).
  int index_of(double t) const;
};

/// State visible to an adapted drift at the left endpoint of step k.
struct StepContext {
  const Geometry& g;
  const Point& x;
  const Frame& u;
  int k;
  double t;
  double l;  // accumulated local time
};

/// Adapted drift in frame coordinates; the step displacement is
/// u_k (db_k + drift dt). Must depend only on the path up to t_k.
using DriftFn = std::function<Vec(const StepContext&)>;

/// Discretized reflected path. The local-time increment dl[k] is the push
/// applied on arrival at node k, so dl[k] > 0 implies x[k] is on the boundary.
struct PathSample {
  TimeGrid grid;
  int dim = 0;
  int chart_dim = 0;
  std::vector<Point> x;         // n+1 nodes
  bool frames_constant = true;  // flat geometries keep u_k = u_0
  std::vector<Frame> frames;    // 1 entry if frames_constant, else n+1
  std::vector<Vec> db;          // n raw Gaussian increments (no drift)
  std::vector<double> dl;       // n+1, arrival-aligned, dl[0] = 0
  std::vector<std::uint8_t> contact;  // n+1

  int n_steps() const { return grid.n_steps; }
  const Frame& frame(int k) const { return frames_constant ? frames[0] : frames[k]; }
  /// Sum of dl over nodes in (s, t].
  double local_time(int s, int t) const;
  double total_local_time() const { return local_time(0, n_steps()); }
  /// Largest node index with dl > 0, or 0 if the path never pushed.
  int last_contact_index() const;
};

/// Euler step + Skorokhod projection scheme for (2.1)/(2.3):
///   y = exp_step(x_k, u_k, db_k + drift dt); (x_{k+1}, dl) = project(y);
///   u_{k+1} = transport(x_k -> x_{k+1}, u_k).
/// Deterministic given (seed, stream); drift may be null.
void simulate(const Geometry& g, const Point& x0, const Frame& u0, const TimeGrid& grid,
              const DriftFn& drift, RandomSource rng, PathSample& out);
PathSample simulate(const Geometry& g, const Point& x0, const Frame& u0, const TimeGrid& grid,
                    const DriftFn& drift, RandomSource rng);

/// (1/(2 band)) sum_k 1{dist(x_k) < band} dt — occupation-time estimate of
/// the boundary local time.
double occupation_local_time(const Geometry& g, const PathSample& path, double band);

/// Common-random-number pair: base path and the path driven by the identical
/// increments plus drift eps*hdot (hdot evaluated on the perturbed path's own
/// prefix).
void paired_simulate(const Geometry& g, const Point& x0, const Frame& u0, const TimeGrid& grid,
                     const DriftFn& hdot, double eps, RandomSource rng, PathSample& base,
                     PathSample& perturbed);

}  // namespace rbm
