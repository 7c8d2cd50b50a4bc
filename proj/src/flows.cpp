#include "rbm/flows.hpp"

#include <cmath>

#include "rbm/parallel.hpp"
#include "rbm/stats.hpp"

namespace rbm {

double GirsanovWeight::value() const { return std::exp(log_value); }

GirsanovWeight girsanov_weight(const Geometry& g, const PathSample& path,
                               const CameronMartinDirection& h, double eps) {
  const double dt = path.grid.dt();
  double mart = 0.0, quad = 0.0, ltime = 0.0;
  for (int k = 0; k < path.n_steps(); ++k) {
    const StepContext ctx{g, path.x[k], path.frame(k), k, path.grid.time(k), ltime};
    const Vec hd = h.hdot(ctx);
    mart += hd.dot(path.db[k]);
    quad += hd.squaredNorm() * dt;
    ltime += path.dl[k + 1];
  }
  return GirsanovWeight{eps * mart - 0.5 * eps * eps * quad};
}

bool QuasiInvarianceReport::pass() const {
  if (!conclusive) return true;  // inconclusive is not a failure
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

QuasiInvarianceReport quasi_invariance_test(const Geometry& g, const Point& x0, const Frame& u0,
                                            const TimeGrid& grid, const CameronMartinDirection& h,
                                            double eps, int n_paths, RandomSource rng) {
  const int n = grid.n_steps;
  const std::vector<int> probes = {n / 4, n / 2, n};
  const int d = g.chart_dim();
  const std::size_t nq = probes.size() * d;

  // Weighted ensemble: X under R^{eps,h} P. Perturbed ensemble: X^{eps,h}
  // under P, independent streams.
  std::vector<double> w(n_paths);
  std::vector<std::vector<double>> base_vals(nq, std::vector<double>(n_paths));
  std::vector<std::vector<double>> pert_vals(nq, std::vector<double>(n_paths));

  const DriftFn pert_drift = [&h, eps](const StepContext& c) { return Vec(eps * h.hdot(c)); };
  parallel_for(n_paths, [&](std::int64_t b, std::int64_t e) {
    PathSample base, pert;
    for (std::int64_t i = b; i < e; ++i) {
      simulate(g, x0, u0, grid, DriftFn{}, rng.with_stream(i), base);
      w[i] = girsanov_weight(g, base, h, eps).value();
      simulate(g, x0, u0, grid, pert_drift, rng.salted(1).with_stream(i), pert);
      for (std::size_t p = 0; p < probes.size(); ++p)
        for (int c = 0; c < d; ++c) {
          base_vals[p * d + c][i] = base.x[probes[p]].c(c);
          pert_vals[p * d + c][i] = pert.x[probes[p]].c(c);
        }
    }
  });

  QuasiInvarianceReport rep;
  rep.ess = effective_sample_size(w);
  if (rep.ess < 0.5 * n_paths) {
    rep.conclusive = false;
    return rep;
  }

  double wsum = 0.0;
  for (double wi : w) wsum += wi;

  for (std::size_t qi = 0; qi < nq; ++qi) {
    const auto& xs = base_vals[qi];
    const auto& ys = pert_vals[qi];
    const std::string tag =
        "t" + std::to_string(probes[qi / d]) + ".x" + std::to_string(qi % d);

    // First two moments: z-test of the weighted mean of x^m against the
    // plain mean of y^m, SE by the delta method for the ratio estimator.
    for (int m = 1; m <= 2; ++m) {
      double sw = 0.0;
      for (int i = 0; i < n_paths; ++i) sw += w[i] * std::pow(xs[i], m);
      const double mw = sw / wsum;
      double vw = 0.0;
      for (int i = 0; i < n_paths; ++i) {
        const double r = w[i] * (std::pow(xs[i], m) - mw);
        vw += r * r;
      }
      const double se_w = std::sqrt(vw) / wsum;
      std::vector<double> ym(ys.size());
      for (std::size_t i = 0; i < ys.size(); ++i) ym[i] = std::pow(ys[i], m);
      const Estimate ey = estimate_from(ym);
      const double se = std::sqrt(se_w * se_w + ey.std_error * ey.std_error);
      const double z = se > 0.0 ? std::abs(mw - ey.mean) / se : 0.0;
      rep.rows.push_back({"moment" + std::to_string(m) + "." + tag, z, 3.0, z <= 3.0});
    }

    const double ks = ks_statistic_weighted_two_sample(xs, w, ys);
    const double crit = ks_critical(kKsCoeff1Percent, rep.ess, static_cast<double>(n_paths));
    rep.rows.push_back({"ks." + tag, ks, crit, ks <= crit});
  }
  return rep;
}

}  // namespace rbm
