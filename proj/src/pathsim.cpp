#include "rbm/pathsim.hpp"

#include <cmath>
#include <stdexcept>

namespace rbm {

int TimeGrid::index_of(double t) const {
  const double k = t / dt();
  const int ki = static_cast<int>(std::lround(k));
  if (ki < 0 || ki > n_steps || std::abs(t - ki * dt()) > 1e-9)
    throw std::invalid_argument("time " + std::to_string(t) + " is not on the grid");
  return ki;
}

double PathSample::local_time(int s, int t) const {
  double sum = 0.0;
  for (int k = s + 1; k <= t; ++k) sum += dl[k];
  return sum;
}

int PathSample::last_contact_index() const {
  for (int k = n_steps(); k >= 1; --k)
    if (dl[k] > 0.0) return k;
  return 0;
}

namespace {

void prepare(const Geometry& g, const Point& x0, const Frame& u0, const TimeGrid& grid,
             PathSample& out) {
  if (grid.n_steps < 1) throw std::invalid_argument("simulate: n_steps >= 1 required");
  if (!g.contains(x0)) throw std::domain_error("simulate: x0 outside " + g.name());
  const Mat gram = g.metric(x0);
  const Mat err = u0.m.transpose() * gram * u0.m - Mat::Identity(g.dim(), g.dim());
  if (err.cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("simulate: u0 is not orthonormal at x0");

  const int n = grid.n_steps;
  out.grid = grid;
  out.dim = g.dim();
  out.chart_dim = g.chart_dim();
  out.frames_constant = g.is_flat();
  out.x.assign(n + 1, x0);
  out.frames.assign(out.frames_constant ? 1 : n + 1, u0);
  out.db.assign(n, Vec::Zero(g.dim()));
  out.dl.assign(n + 1, 0.0);
  out.contact.assign(n + 1, 0);
  out.contact[0] = std::abs(g.boundary_distance(x0)) < kBoundaryTol ? 1 : 0;
}

}  // namespace

void simulate(const Geometry& g, const Point& x0, const Frame& u0, const TimeGrid& grid,
              const DriftFn& drift, RandomSource rng, PathSample& out) {
  prepare(g, x0, u0, grid, out);
  const int n = grid.n_steps;
  const int d = g.dim();
  const double dt = grid.dt();
  const double sqdt = std::sqrt(dt);
  const GaussianStream gs(rng);

  double ltime = 0.0;
  Vec xi(d);
  for (int k = 0; k < n; ++k) {
    Vec& db = out.db[k];
    for (int c = 0; c < d; c += 2) {
      double z0, z1;
      gs.normal_pair(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(c >> 1), z0, z1);
      db(c) = sqdt * z0;
      if (c + 1 < d) db(c + 1) = sqdt * z1;
    }
    xi = db;
    const Frame& uk = out.frame(k);
    if (drift) {
      const StepContext ctx{g, out.x[k], uk, k, grid.time(k), ltime};
      xi += drift(ctx) * dt;
    }
    const Point y = g.exp_step(out.x[k], uk, xi);
    auto proj = g.project_to_domain(y);
    out.x[k + 1] = proj.x;
    out.dl[k + 1] = proj.push;
    ltime += proj.push;
    out.contact[k + 1] =
        (proj.push > 0.0 || std::abs(g.boundary_distance(proj.x)) < kBoundaryTol) ? 1 : 0;
    if (!out.frames_constant) {
      out.frames[k + 1] = g.transport_frame(out.x[k], out.x[k + 1], out.frames[k]);
      if ((k + 1) % 100 == 0) out.frames[k + 1] = g.orthonormalize(out.x[k + 1], out.frames[k + 1]);
    }
  }
}

PathSample simulate(const Geometry& g, const Point& x0, const Frame& u0, const TimeGrid& grid,
                    const DriftFn& drift, RandomSource rng) {
  PathSample out;
  simulate(g, x0, u0, grid, drift, rng, out);
  return out;
}

double occupation_local_time(const Geometry& g, const PathSample& path, double band) {
  if (band <= 0.0) throw std::invalid_argument("occupation_local_time: band must be positive");
  const double dt = path.grid.dt();
  double occ = 0.0;
  for (int k = 0; k <= path.n_steps(); ++k)
    if (g.boundary_distance(path.x[k]) < band) occ += dt;
  return occ / (2.0 * band);
}

void paired_simulate(const Geometry& g, const Point& x0, const Frame& u0, const TimeGrid& grid,
                     const DriftFn& hdot, double eps, RandomSource rng, PathSample& base,
                     PathSample& perturbed) {
  simulate(g, x0, u0, grid, DriftFn{}, rng, base);
  if (eps == 0.0) {
    perturbed = base;
    return;
  }
  DriftFn scaled = [&hdot, eps](const StepContext& ctx) { return Vec(eps * hdot(ctx)); };
  simulate(g, x0, u0, grid, scaled, rng, perturbed);
}

}  // namespace rbm
