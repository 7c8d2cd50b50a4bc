#include "rbm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "rbm/parallel.hpp"

namespace rbm {

namespace {

std::map<std::string, std::string> base_config(const Geometry& g, const TimeGrid& grid, int n_paths,
                                               RandomSource rng) {
  return {
      {"geometry", g.name()},
      {"T", format_double(grid.horizon)},
      {"n_steps", std::to_string(grid.n_steps)},
      {"dt", format_double(grid.dt())},
      {"n_paths", std::to_string(n_paths)},
      {"seed", std::to_string(rng.seed)},
  };
}

// Statistical rows: fail on |z| > 3; otherwise pass only when 3 SE resolves
// 5% of the quantity's natural scale, else the test lacks power.
RowStatus z_status(double z, double se, double scale) {
  if (std::abs(z) > 3.0) return RowStatus::Fail;
  if (3.0 * se > 0.05 * std::abs(scale)) return RowStatus::Inconclusive;
  return RowStatus::Pass;
}

ReportRow paired_diff_row(const std::string& name, std::span<const double> diffs, double scale,
                          double eps = 0.0) {
  const Estimate est = estimate_from(diffs);
  const double z = est.std_error > 0.0 ? est.mean / est.std_error : 0.0;
  return ReportRow{name, est, z, z_status(z, est.std_error, scale), eps};
}

ReportRow info_row(const std::string& name, const Estimate& est, double eps = 0.0) {
  return ReportRow{name, est, 0.0, RowStatus::Info, eps};
}

ReportRow exact_row(const std::string& name, double value, double tol, double eps = 0.0) {
  return ReportRow{name, Estimate{value, 0.0, 1}, 0.0,
                   value <= tol ? RowStatus::Pass : RowStatus::Fail, eps};
}

double sd_of(const Estimate& e) { return e.std_error * std::sqrt(static_cast<double>(e.n)); }

// Girsanov pairing sum <hdot, db> along the base path.
double weight_integral(const Geometry& g, const PathSample& path, const CameronMartinDirection& h) {
  double acc = 0.0, ltime = 0.0;
  for (int k = 0; k < path.n_steps(); ++k) {
    const StepContext ctx{g, path.x[k], path.frame(k), k, path.grid.time(k), ltime};
    acc += h.hdot(ctx).dot(path.db[k]);
    ltime += path.dl[k + 1];
  }
  return acc;
}

// Linear eps -> 0 extrapolation from the two smallest entries of a
// descending-sorted sweep.
double extrapolate_to_zero(std::span<const double> eps, std::span<const double> vals) {
  const std::size_t m = eps.size();
  if (m == 1) return vals[0];
  const double el = eps[m - 2], es = eps[m - 1];
  const double slope = (vals[m - 2] - vals[m - 1]) / (el - es);
  return vals[m - 1] - slope * es;
}

}  // namespace

std::vector<ExperimentReport> ibp_battery(const Geometry& g, const Point& x0, const Frame& u0,
                                          const TimeGrid& grid, std::span<const IbpMember> members,
                                          std::span<const double> eps_list, int n_paths,
                                          RandomSource rng) {
  if (members.empty()) throw std::invalid_argument("ibp_battery: no members");
  std::vector<double> eps(eps_list.begin(), eps_list.end());
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  if (eps.empty() || eps.back() <= 0.0) throw std::invalid_argument("ibp: need positive epsilons");
  const int m = static_cast<int>(members.size());
  const int ne = static_cast<int>(eps.size());

  // Perturbed ensembles are shared between members with the same direction.
  std::vector<int> hgroup(m);
  std::vector<const CameronMartinDirection*> dirs;
  for (int j = 0; j < m; ++j) {
    int found = -1;
    for (std::size_t u = 0; u < dirs.size(); ++u)
      if (dirs[u]->name == members[j].h.name) found = static_cast<int>(u);
    if (found < 0) {
      dirs.push_back(&members[j].h);
      found = static_cast<int>(dirs.size()) - 1;
    }
    hgroup[j] = found;
  }

  std::vector<std::vector<double>> A(m, std::vector<double>(n_paths));
  std::vector<std::vector<double>> C(m, std::vector<double>(n_paths));
  std::vector<std::vector<std::vector<double>>> B(
      m, std::vector<std::vector<double>>(ne, std::vector<double>(n_paths)));

  parallel_for(n_paths, [&](std::int64_t lo, std::int64_t hi) {
    PathSample base, pert;
    std::vector<double> fbase(m);
    for (std::int64_t i = lo; i < hi; ++i) {
      simulate(g, x0, u0, grid, DriftFn{}, rng.with_stream(i), base);
      const MatrixPath q = evolve_q_limit(g, base);
      std::vector<double> wgt(dirs.size());
      for (std::size_t u = 0; u < dirs.size(); ++u) wgt[u] = weight_integral(g, base, *dirs[u]);
      for (int j = 0; j < m; ++j) {
        fbase[j] = members[j].f.eval_on(base);
        A[j][i] = directional_derivative(g, members[j].f, base, members[j].h, q);
        C[j][i] = fbase[j] * wgt[hgroup[j]];
      }
      for (std::size_t u = 0; u < dirs.size(); ++u) {
        const CameronMartinDirection& h = *dirs[u];
        for (int e = 0; e < ne; ++e) {
          const double ev = eps[e];
          const DriftFn drift = [&h, ev](const StepContext& c) { return Vec(ev * h.hdot(c)); };
          simulate(g, x0, u0, grid, drift, rng.with_stream(i), pert);
          for (int j = 0; j < m; ++j) {
            if (hgroup[j] != static_cast<int>(u)) continue;
            B[j][e][i] = (members[j].f.eval_on(pert) - fbase[j]) / ev;
          }
        }
      }
    }
  });

  std::vector<ExperimentReport> out;
  out.reserve(m);
  std::vector<double> diff(n_paths), bvals(ne), b0(n_paths);
  for (int j = 0; j < m; ++j) {
    ExperimentReport rep;
    rep.experiment = "ibp";
    rep.geometry = g.name();
    rep.config = base_config(g, grid, n_paths, rng);
    rep.config["f"] = members[j].f.name();
    rep.config["h"] = members[j].h.name;

    const Estimate estA = estimate_from(A[j]);
    const Estimate estC = estimate_from(C[j]);
    rep.rows.push_back(info_row("A.damped_gradient", estA));
    rep.rows.push_back(info_row("C.stochastic_integral", estC));
    const double scale = std::abs(estC.mean) + sd_of(estC);
    for (int i = 0; i < n_paths; ++i) diff[i] = A[j][i] - C[j][i];
    rep.rows.push_back(paired_diff_row("A_minus_C", diff, scale));

    for (int e = 0; e < ne; ++e)
      rep.rows.push_back(info_row("B.quotient", estimate_from(B[j][e]), eps[e]));
    for (int i = 0; i < n_paths; ++i) {
      for (int e = 0; e < ne; ++e) bvals[e] = B[j][e][i];
      b0[i] = extrapolate_to_zero(eps, bvals);
      diff[i] = b0[i] - C[j][i];
    }
    rep.rows.push_back(info_row("B.extrapolated", estimate_from(b0)));
    rep.rows.push_back(paired_diff_row("B_extrap_minus_C", diff, scale));
    out.push_back(std::move(rep));
  }
  return out;
}

ExperimentReport ibp_check(const Geometry& g, const Point& x0, const Frame& u0,
                           const TimeGrid& grid, const CylindricalFunction& f,
                           const CameronMartinDirection& h, std::span<const double> eps_list,
                           int n_paths, RandomSource rng) {
  const IbpMember member{f, h};
  return ibp_battery(g, x0, u0, grid, std::span<const IbpMember>(&member, 1), eps_list, n_paths,
                     rng)[0];
}

std::vector<IbpMember> default_ibp_battery(const Geometry& g, double horizon) {
  const double T = horizon;
  std::vector<IbpMember> out;
  out.push_back({CylindricalFunction::coordinate(g, 0, T),
                 CameronMartinDirection::parse(g, "linear:0", T)});
  out.push_back({CylindricalFunction::quadratic(g, 0, T), CameronMartinDirection::parse(g, "sin:0", T)});
  out.push_back({CylindricalFunction::product(g, 0, 0.5 * T, T),
                 CameronMartinDirection::parse(g, "linear:0", T)});
  const double center = g.kind() == GeomKind::Interval ? 0.5 : 0.0;
  out.push_back({CylindricalFunction::bump(g, 0, center, 0.5, T),
                 CameronMartinDirection::tanh_adapted(g.dim(), 0, center, T)});
  out.push_back({CylindricalFunction::mix3(g, 0, 0.25 * T, 0.5 * T, T),
                 CameronMartinDirection::parse(g, "sin:0", T)});
  return out;
}

ExperimentReport bismut_check(const Geometry& g, const Point& x0, const Frame& u0,
                              const TimeGrid& grid, const ScalarFunction& f, const Vec& v_frame,
                              double delta, int n_paths, RandomSource rng) {
  const bool is_1d = g.dim() == 1;
  const double T = grid.horizon;
  const Vec hdot = v_frame / T;  // h_T = u0^{-1} v with constant derivative
  const int n = grid.n_steps;
  const int coord = 0;  // f acts on the first chart coordinate

  std::vector<double> est(n_paths), fd(is_1d ? 0 : n_paths);

  parallel_for(n_paths, [&](std::int64_t lo, std::int64_t hi) {
    PathSample base, plus, minus;
    std::vector<Mat> prefix;
    for (std::int64_t i = lo; i < hi; ++i) {
      simulate(g, x0, u0, grid, DriftFn{}, rng.with_stream(i), base);
      const MatrixPath q = evolve_q_limit(g, base);
      // Forward prefix products Q_{0,k}, left-endpoint pairing with db.
      Mat acc = Mat::Identity(q.dim, q.dim);
      double w = 0.0;
      for (int k = 0; k < n; ++k) {
        w += (acc.transpose() * hdot).dot(base.db[k]);
        acc = acc * q.factors[k];
      }
      est[i] = f.f(base.x[n].c(coord)) * w;
      if (!is_1d) {
        const Point xp = g.exp_step(x0, u0, Vec(delta * v_frame));
        const Point xm = g.exp_step(x0, u0, Vec(-delta * v_frame));
        simulate(g, xp, g.standard_frame(xp), grid, DriftFn{}, rng.with_stream(i), plus);
        simulate(g, xm, g.standard_frame(xm), grid, DriftFn{}, rng.with_stream(i), minus);
        fd[i] = (f.f(plus.x[n].c(coord)) - f.f(minus.x[n].c(coord))) / (2.0 * delta);
      }
    }
  });

  ExperimentReport rep;
  rep.experiment = "bismut";
  rep.geometry = g.name();
  rep.config = base_config(g, grid, n_paths, rng);
  rep.config["f"] = f.name;
  rep.config["delta"] = format_double(delta);

  const Estimate e_est = estimate_from(est);
  rep.rows.push_back(info_row("estimator", e_est));
  if (is_1d) {
    const KernelSpec spec{g.kind()};
    const double ref = v_frame(0) * neumann_gradient(spec, T, x0.c(0), f);
    rep.rows.push_back(info_row("reference.kernel", Estimate{ref, 0.0, 1}));
    const double z = e_est.std_error > 0.0 ? (e_est.mean - ref) / e_est.std_error : 0.0;
    rep.rows.push_back(ReportRow{"est_minus_ref", Estimate{e_est.mean - ref, e_est.std_error, e_est.n},
                                 z, z_status(z, e_est.std_error, std::abs(ref) + sd_of(e_est)), 0.0});
  } else {
    const Estimate e_fd = estimate_from(fd);
    rep.rows.push_back(info_row("reference.finite_difference", e_fd));
    std::vector<double> diff(n_paths);
    for (int i = 0; i < n_paths; ++i) diff[i] = est[i] - fd[i];
    rep.rows.push_back(paired_diff_row("est_minus_fd", diff, std::abs(e_fd.mean) + sd_of(e_fd)));
  }
  return rep;
}

ExperimentReport martingale_check(const Point& x0, const TimeGrid& grid, const ScalarFunction& f,
                                  std::span<const double> probe_fractions, int n_paths,
                                  RandomSource rng) {
  const Geometry g = Geometry::from_name("halfline");
  const Frame u0 = g.standard_frame(x0);
  const double T = grid.horizon;
  const int n = grid.n_steps;
  const KernelSpec spec = KernelSpec::halfline();

  std::vector<int> probes;
  for (double fr : probe_fractions) {
    const int k = static_cast<int>(std::lround(fr * n));
    if (k <= 0 || k >= n) throw std::invalid_argument("martingale_check: probes must be interior");
    probes.push_back(k);
  }
  const int np = static_cast<int>(probes.size());
  std::vector<std::vector<double>> mvals(np, std::vector<double>(n_paths));

  parallel_for(n_paths, [&](std::int64_t lo, std::int64_t hi) {
    PathSample path;
    for (std::int64_t i = lo; i < hi; ++i) {
      simulate(g, x0, u0, grid, DriftFn{}, rng.with_stream(i), path);
      int first_contact = n + 1;
      for (int k = 1; k <= n; ++k)
        if (path.dl[k] > 0.0) {
          first_contact = k;
          break;
        }
      for (int p = 0; p < np; ++p) {
        const int s = probes[p];
        const double q01 = s < first_contact ? 1.0 : 0.0;
        mvals[p][i] =
            q01 == 0.0 ? 0.0 : neumann_gradient(spec, T - grid.time(s), path.x[s].c(0), f);
      }
    }
  });

  ExperimentReport rep;
  rep.experiment = "martingale";
  rep.geometry = g.name();
  rep.config = base_config(g, grid, n_paths, rng);
  rep.config["f"] = f.name;
  rep.config["x0"] = format_double(x0.c(0));

  const double at_zero = neumann_gradient(spec, T, x0.c(0), f);
  rep.rows.push_back(info_row("m.s_frac=0", Estimate{at_zero, 0.0, 1}));
  std::vector<Estimate> stats(np);
  for (int p = 0; p < np; ++p) {
    stats[p] = estimate_from(mvals[p]);
    rep.rows.push_back(info_row("m.s_frac=" + format_double(probe_fractions[p]), stats[p]));
  }
  std::vector<double> diff(n_paths);
  for (int p = 0; p < np; ++p)
    for (int q = p + 1; q < np; ++q) {
      for (int i = 0; i < n_paths; ++i) diff[i] = mvals[p][i] - mvals[q][i];
      const double scale = std::abs(at_zero) + sd_of(stats[p]);
      rep.rows.push_back(paired_diff_row("diff.s" + format_double(probe_fractions[p]) + "-s" +
                                             format_double(probe_fractions[q]),
                                         diff, scale));
    }
  // The s=0 probe is deterministic; compare the first probe against it too.
  for (int i = 0; i < n_paths; ++i) diff[i] = mvals[0][i] - at_zero;
  rep.rows.push_back(
      paired_diff_row("diff.s" + format_double(probe_fractions[0]) + "-s0", diff,
                      std::abs(at_zero) + sd_of(stats[0])));
  return rep;
}

ExperimentReport clark_ocone_check(GeomKind kind, const Point& x0, double horizon, double dt,
                                   const ScalarFunction& f, int n_paths, RandomSource rng) {
  if (kind != GeomKind::HalfLine && kind != GeomKind::Interval)
    throw std::invalid_argument("clark_ocone_check: halfline or interval only");
  const Geometry g = Geometry::from_name(kind == GeomKind::HalfLine ? "halfline" : "interval");
  const Frame u0 = g.standard_frame(x0);
  const KernelSpec spec{kind};

  auto run = [&](double step, std::uint64_t salt, double& rho2, double& varf) {
    const int n = static_cast<int>(std::lround(horizon / step));
    const TimeGrid grid{horizon, n};
    std::vector<double> fv(n_paths), sv(n_paths);
    const RandomSource src = salt == 0 ? rng : rng.salted(salt);
    parallel_for(n_paths, [&](std::int64_t lo, std::int64_t hi) {
      PathSample path;
      for (std::int64_t i = lo; i < hi; ++i) {
        simulate(g, x0, u0, grid, DriftFn{}, src.with_stream(i), path);
        double s = 0.0;
        for (int k = 0; k < n; ++k)
          s += neumann_gradient(spec, horizon - grid.time(k), path.x[k].c(0), f) * path.db[k](0);
        fv[i] = f.f(path.x[n].c(0));
        sv[i] = s;
      }
    });
    const Estimate ef = estimate_from(fv);
    CompensatedSum acc;
    for (int i = 0; i < n_paths; ++i) {
      const double r = fv[i] - ef.mean - sv[i];
      acc.add(r * r);
    }
    rho2 = acc.value() / n_paths;
    const double sd = sd_of(ef);
    varf = sd * sd;
  };

  double rho2_a = 0.0, var_a = 0.0, rho2_b = 0.0, var_b = 0.0;
  run(dt, 0, rho2_a, var_a);
  run(0.5 * dt, 1, rho2_b, var_b);

  ExperimentReport rep;
  rep.experiment = "clarkocone";
  rep.geometry = g.name();
  rep.config = {{"geometry", g.name()},        {"T", format_double(horizon)},
                {"dt", format_double(dt)},     {"dt_refined", format_double(0.5 * dt)},
                {"n_paths", std::to_string(n_paths)}, {"seed", std::to_string(rng.seed)},
                {"f", f.name},                 {"x0", format_double(x0.c(0))}};

  rep.rows.push_back(info_row("rho2", Estimate{rho2_a, 0.0, n_paths}));
  rep.rows.push_back(info_row("var_f", Estimate{var_a, 0.0, n_paths}));
  const double ratio = var_a > 0.0 ? rho2_a / var_a : 0.0;
  rep.rows.push_back(ReportRow{"rho2_over_var", Estimate{ratio, 0.0, n_paths}, 0.0,
                               ratio <= 0.01 ? RowStatus::Pass : RowStatus::Fail, 0.0});
  rep.rows.push_back(info_row("rho2.dt_half", Estimate{rho2_b, 0.0, n_paths}));
  const double refine = rho2_a > 0.0 ? rho2_b / rho2_a : 0.0;
  rep.rows.push_back(ReportRow{"rho2_refinement_ratio", Estimate{refine, 0.0, n_paths}, 0.0,
                               (refine >= 0.4 && refine <= 0.6) ? RowStatus::Pass : RowStatus::Fail,
                               0.0});
  return rep;
}

ExperimentReport lsi_check(const Geometry& g, const Point& x0, const Frame& u0,
                           const TimeGrid& grid, std::span<const CylindricalFunction> battery,
                           int n_paths, RandomSource rng) {
  const int m = static_cast<int>(battery.size());
  std::vector<std::vector<double>> fv(m, std::vector<double>(n_paths));
  std::vector<std::vector<double>> en(m, std::vector<double>(n_paths));

  parallel_for(n_paths, [&](std::int64_t lo, std::int64_t hi) {
    PathSample path;
    for (std::int64_t i = lo; i < hi; ++i) {
      simulate(g, x0, u0, grid, DriftFn{}, rng.with_stream(i), path);
      const MatrixPath q = evolve_q_limit(g, path);
      for (int j = 0; j < m; ++j) {
        fv[j][i] = battery[j].eval_on(path);
        en[j][i] = damped_gradient(g, battery[j], path, q).norm_sq();
      }
    }
  });

  ExperimentReport rep;
  rep.experiment = "lsi";
  rep.geometry = g.name();
  rep.config = base_config(g, grid, n_paths, rng);

  std::vector<double> e(n_paths);
  for (int j = 0; j < m; ++j) {
    CompensatedSum sq;
    for (int i = 0; i < n_paths; ++i) sq.add(fv[j][i] * fv[j][i]);
    const double norm2 = sq.value() / n_paths;
    const std::string tag = "." + battery[j].name();
    if (norm2 <= 0.0) {
      rep.rows.push_back(exact_row("lsi_margin" + tag, 0.0, 0.0));
      continue;
    }
    // Per-path entropy-minus-energy with the empirical normalization
    // mean F^2 = 1 (x log x -> 0 at 0).
    const double logn = std::log(norm2);
    for (int i = 0; i < n_paths; ++i) {
      const double f2 = fv[j][i] * fv[j][i];
      const double ent = f2 > 0.0 ? f2 * (std::log(f2) - logn) / norm2 : 0.0;
      e[i] = ent - 2.0 * en[j][i] / norm2;
    }
    const Estimate ee = estimate_from(e);
    double ent_mean = 0.0, energy_mean = 0.0;
    {
      CompensatedSum se_, sn_;
      for (int i = 0; i < n_paths; ++i) {
        const double f2 = fv[j][i] * fv[j][i];
        se_.add(f2 > 0.0 ? f2 * (std::log(f2) - logn) / norm2 : 0.0);
        sn_.add(en[j][i] / norm2);
      }
      ent_mean = se_.value() / n_paths;
      energy_mean = sn_.value() / n_paths;
    }
    rep.rows.push_back(info_row("entropy" + tag, Estimate{ent_mean, 0.0, n_paths}));
    rep.rows.push_back(info_row("energy" + tag, Estimate{energy_mean, 0.0, n_paths}));
    // One-sided: fail only when Ent - 2 Energy > 3 SE.
    const double z = ee.std_error > 0.0 ? ee.mean / ee.std_error : 0.0;
    RowStatus st;
    if (z > 3.0)
      st = RowStatus::Fail;
    else if (3.0 * ee.std_error > 0.05 * (std::abs(ent_mean) + 2.0 * energy_mean + 0.05))
      st = RowStatus::Inconclusive;
    else
      st = RowStatus::Pass;
    rep.rows.push_back(ReportRow{"lsi_margin" + tag, ee, z, st, 0.0});
  }
  return rep;
}

std::vector<CylindricalFunction> default_lsi_battery(const Geometry& g, double horizon) {
  const double T = horizon;
  const bool hemi = g.kind() == GeomKind::Hemisphere;
  const double center = g.kind() == GeomKind::Interval ? 0.5 : (hemi ? 0.5 : 0.0);
  const int jz = hemi ? 2 : 0;
  std::vector<CylindricalFunction> out;
  out.push_back(CylindricalFunction::affine(g, 0, 1.0, 0.5, T));
  out.push_back(CylindricalFunction::quadratic(g, jz, T));
  out.push_back(CylindricalFunction::bump(g, 0, center, 0.5, T));
  out.push_back(CylindricalFunction::product(g, 0, 0.5 * T, T));
  out.push_back(CylindricalFunction::mix3(g, jz, 0.25 * T, 0.5 * T, T));
  return out;
}

ExperimentReport counterexample_demo(const TimeGrid& grid, int n_paths, RandomSource rng) {
  const Geometry g = Geometry::from_name("interval");
  const double eps = 1e-3;
  const int n = grid.n_steps;
  Point x0{Vec::Zero(1)};
  const Frame u0 = g.standard_frame(x0);
  const CylindricalFunction f = CylindricalFunction::coordinate(g, 0, grid.horizon);
  const CameronMartinDirection h = CameronMartinDirection::linear(1, 0);

  // The remark's two claims live on two realizations of the same flow law.
  // Negative pathwise quotients need the mirror coupling X^eps = fold(bhat +
  // eps h); its expectation partner is F int <hdot, d bhat> (the Section-1
  // pairing). The SDE-driver coupling (projection scheme, common db) is
  // monotone, and its quotient matches E D_h F (Theorem 2.1). D_h F >= 0
  // pathwise either way.
  std::vector<double> qm(n_paths), dm(n_paths), cm(n_paths);
  std::vector<double> qf(n_paths), df(n_paths);
  parallel_for(n_paths, [&](std::int64_t lo, std::int64_t hi) {
    const auto hdot1 = [](double) { return 1.0; };
    PathSample base, pert;
    for (std::int64_t i = lo; i < hi; ++i) {
      const MirrorFlowPair mp =
          mirror_flow_pair_1d(GeomKind::Interval, grid, hdot1, eps, rng.with_stream(i));
      qm[i] = (mp.pert[n] - mp.base[n]) / eps;
      dm[i] = grid.horizon - grid.time(mp.last_crossing);
      cm[i] = mp.base[n] * mp.bhat[n];  // h_t = t: int hdot dbhat = bhat_T

      paired_simulate(g, x0, u0, grid, h.drift(), eps, rng.with_stream(i), base, pert);
      qf[i] = (f.eval_on(pert) - f.eval_on(base)) / eps;
      df[i] = directional_derivative(g, f, base, h, evolve_q_limit(g, base));
    }
  });

  ExperimentReport rep;
  rep.experiment = "counterexample";
  rep.geometry = g.name();
  rep.config = base_config(g, grid, n_paths, rng);
  rep.config["epsilon"] = format_double(eps);
  rep.config["h"] = "linear:0";
  rep.config["f"] = "coord:0";

  const Estimate eqm = estimate_from(qm);
  const Estimate edm = estimate_from(dm);
  const Estimate eqf = estimate_from(qf);
  const Estimate edf = estimate_from(df);
  rep.rows.push_back(info_row("mean_quotient.mirror", eqm, eps));
  rep.rows.push_back(info_row("mean_dhf.mirror", edm));
  rep.rows.push_back(info_row("mean_quotient.flow", eqf, eps));
  rep.rows.push_back(info_row("mean_dhf", edf));

  // (i) the pathwise counterexample: quotient < -0.5 while D_h F >= 0.
  int hits = 0;
  double dmin = std::min(dm[0], df[0]);
  for (int i = 0; i < n_paths; ++i) {
    if (qm[i] < -0.5 && dm[i] >= -1e-9) ++hits;
    dmin = std::min(dmin, std::min(dm[i], df[i]));
  }
  const double frac = static_cast<double>(hits) / n_paths;
  const double se_frac = std::sqrt(std::max(frac * (1.0 - frac), 0.0) / n_paths);
  rep.rows.push_back(ReportRow{"frac_negative_quotient_with_nonneg_gradient",
                               Estimate{frac, se_frac, n_paths}, 0.0,
                               frac > 0.05 ? RowStatus::Pass : RowStatus::Fail, eps});
  rep.rows.push_back(ReportRow{"min_dhf", Estimate{dmin, 0.0, n_paths}, 0.0,
                               dmin >= -1e-9 ? RowStatus::Pass : RowStatus::Fail, 0.0});

  // (ii) expectations agree: the flow quotient against D_h F (Theorem 2.1)
  // and the mirror quotient against its own Girsanov partner.
  std::vector<double> diff(n_paths);
  for (int i = 0; i < n_paths; ++i) diff[i] = qf[i] - df[i];
  rep.rows.push_back(paired_diff_row("quotient_minus_dhf", diff, std::abs(edf.mean) + sd_of(edf), eps));
  for (int i = 0; i < n_paths; ++i) diff[i] = qm[i] - cm[i];
  const Estimate ecm = estimate_from(cm);
  rep.rows.push_back(
      paired_diff_row("mirror_quotient_minus_weight", diff, std::abs(ecm.mean) + sd_of(ecm), eps));
  return rep;
}

ExperimentReport girsanov_check(const Geometry& g, const Point& x0, const Frame& u0,
                                const TimeGrid& grid, const CameronMartinDirection& h,
                                std::span<const double> eps_list, int n_paths, RandomSource rng) {
  ExperimentReport rep;
  rep.experiment = "girsanov";
  rep.geometry = g.name();
  rep.config = base_config(g, grid, n_paths, rng);
  rep.config["h"] = h.name;

  std::vector<double> w(n_paths);
  for (double eps : eps_list) {
    parallel_for(n_paths, [&](std::int64_t lo, std::int64_t hi) {
      PathSample path;
      for (std::int64_t i = lo; i < hi; ++i) {
        simulate(g, x0, u0, grid, DriftFn{}, rng.with_stream(i), path);
        w[i] = girsanov_weight(g, path, h, eps).value();
      }
    });
    const Estimate ew = estimate_from(w);
    const double z = ew.std_error > 0.0 ? (ew.mean - 1.0) / ew.std_error : 0.0;
    rep.rows.push_back(ReportRow{"mean_R", ew, z, z_status(z, ew.std_error, 1.0), eps});

    const auto qi = quasi_invariance_test(g, x0, u0, grid, h, eps, n_paths, rng);
    if (!qi.conclusive) {
      rep.rows.push_back(ReportRow{"quasi_invariance", Estimate{qi.ess, 0.0, n_paths}, 0.0,
                                   RowStatus::Inconclusive, eps});
      continue;
    }
    // Fold the marginal comparisons into one worst-case row per kind plus
    // detail rows for failures.
    double worst_ratio = 0.0;
    std::string worst_name;
    bool all_pass = true;
    for (const auto& r : qi.rows) {
      const double ratio = r.threshold > 0.0 ? r.value / r.threshold : 0.0;
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst_name = r.quantity;
      }
      all_pass = all_pass && r.pass;
    }
    rep.config["qi_worst"] = worst_name;
    rep.rows.push_back(ReportRow{"quasi_invariance_worst_ratio",
                                 Estimate{worst_ratio, 0.0, n_paths}, 0.0,
                                 all_pass ? RowStatus::Pass : RowStatus::Fail, eps});
    rep.rows.push_back(info_row("effective_sample_size", Estimate{qi.ess, 0.0, n_paths}, eps));
  }
  return rep;
}

ExperimentReport qcheck(const Geometry& g, const Point& x0, const Frame& u0, const TimeGrid& grid,
                        std::span<const double> eps_ladder, int n_paths, RandomSource rng) {
  const int n = grid.n_steps;
  const int ne = static_cast<int>(eps_ladder.size());
  const bool is_1d = g.dim() == 1;

  std::vector<double> exact_eps_err(n_paths, 0.0), exact_lim_err(n_paths, 0.0);
  std::vector<double> cocycle_dev(n_paths, 0.0), bound_margin(n_paths, 0.0);
  std::vector<double> annihilation(n_paths, 0.0);
  std::vector<std::vector<double>> conv(ne, std::vector<double>(n_paths, 0.0));
  const double exact_eps = 0.1;
  const double K = -g.ricci_lower_bound();
  const double sigma = -g.ii_lower_bound();

  parallel_for(n_paths, [&](std::int64_t lo, std::int64_t hi) {
    PathSample path;
    std::vector<Mat> prefix;
    for (std::int64_t i = lo; i < hi; ++i) {
      simulate(g, x0, u0, grid, DriftFn{}, rng.with_stream(i), path);
      const MatrixPath qlim = evolve_q_limit(g, path);
      const MatrixPath qeps = evolve_q_eps(g, path, exact_eps);

      // Deterministic pseudo-random triples s <= t <= r per path.
      std::uint64_t state = (0x9E3779B97F4A7C15ull * (i + 1)) ^ rng.seed;
      auto next_idx = [&state, n]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<int>((state >> 33) % static_cast<std::uint64_t>(n + 1));
      };
      int s = next_idx(), t = next_idx(), r = next_idx();
      if (s > t) std::swap(s, t);
      if (t > r) std::swap(t, r);
      if (s > t) std::swap(s, t);
      cocycle_dev[i] = std::max(cocycle_check(qlim, s, t, r), cocycle_check(qeps, s, t, r));

      if (is_1d) {
        const double ql = qlim.q(s, r)(0, 0);
        exact_lim_err[i] = std::abs(ql - explicit_q_1d(path, s, r));
        const double qe = qeps.q(s, r)(0, 0);
        exact_eps_err[i] = std::abs(qe - std::exp(-path.local_time(s, r) / exact_eps));
      }

      const NormBoundReport nb = q_norm_bound_check(g, path, qlim, K, sigma);
      bound_margin[i] = nb.worst_margin;

      // Boundary annihilation and the eps ladder share the prefix sweep.
      Mat acc = Mat::Identity(qlim.dim, qlim.dim);
      double worst = 0.0;
      for (int k = 1; k <= n; ++k) {
        acc = acc * qlim.factors[k - 1];
        if (path.dl[k] > 0.0) {
          const Mat p = g.normal_projection_in_frame(path.x[k], path.frame(k));
          worst = std::max(worst, operator_norm(Mat(acc * p)));
        }
      }
      annihilation[i] = worst;

      const Mat qT = qlim.q(0, n);
      for (int e = 0; e < ne; ++e) {
        const MatrixPath qe = evolve_q_eps(g, path, eps_ladder[e]);
        const double d = operator_norm(Mat(qe.q(0, n) - qT));
        conv[e][i] = d * d;
      }
    }
  });

  ExperimentReport rep;
  rep.experiment = "qcheck";
  rep.geometry = g.name();
  rep.config = base_config(g, grid, n_paths, rng);
  rep.config["K"] = format_double(K);
  rep.config["sigma"] = format_double(sigma);

  auto max_of = [](std::span<const double> xs) {
    double m = xs[0];
    for (double x : xs) m = std::max(m, x);
    return m;
  };
  if (is_1d) {
    rep.rows.push_back(exact_row("exactness_eps_max_err", max_of(exact_eps_err), 1e-12, exact_eps));
    rep.rows.push_back(exact_row("exactness_limit_max_err", max_of(exact_lim_err), 1e-12));
  }
  rep.rows.push_back(exact_row("cocycle_max_dev", max_of(cocycle_dev), 1e-10));
  rep.rows.push_back(exact_row("norm_bound_worst_margin", max_of(bound_margin), 1e-10));
  rep.rows.push_back(exact_row("annihilation_max", max_of(annihilation), 1e-10));

  bool monotone = true;
  double prev = 0.0;
  for (int e = 0; e < ne; ++e) {
    const Estimate ec = estimate_from(conv[e]);
    rep.rows.push_back(info_row("E_norm_sq_Qeps_minus_Q", ec, eps_ladder[e]));
    if (e > 0) monotone = monotone && (ec.mean <= prev + 1e-15);
    prev = ec.mean;
  }
  if (ne > 0) {
    rep.rows.push_back(ReportRow{"convergence_monotone", Estimate{monotone ? 1.0 : 0.0, 0.0, n_paths},
                                 0.0, monotone ? RowStatus::Pass : RowStatus::Fail, 0.0});
    const Estimate last = estimate_from(conv[ne - 1]);
    rep.rows.push_back(ReportRow{"convergence_final", last, 0.0,
                                 last.mean <= 1e-3 ? RowStatus::Pass : RowStatus::Fail,
                                 eps_ladder[ne - 1]});
  }
  return rep;
}

ExperimentReport local_time_calibration(double horizon, double dt, double band, int n_paths,
                                        RandomSource rng) {
  const Geometry g = Geometry::from_name("halfline");
  Point x0{Vec::Zero(1)};
  const Frame u0 = g.standard_frame(x0);
  const int n = static_cast<int>(std::lround(horizon / dt));
  const TimeGrid grid{horizon, n};

  std::vector<double> total(n_paths), occ(n_paths);
  parallel_for(n_paths, [&](std::int64_t lo, std::int64_t hi) {
    PathSample path;
    for (std::int64_t i = lo; i < hi; ++i) {
      simulate(g, x0, u0, grid, DriftFn{}, rng.with_stream(i), path);
      total[i] = path.total_local_time();
      occ[i] = occupation_local_time(g, path, band);
    }
  });

  ExperimentReport rep;
  rep.experiment = "localtime";
  rep.geometry = g.name();
  rep.config = base_config(g, grid, n_paths, rng);
  rep.config["band"] = format_double(band);

  // E l_T = E|B_T| = sqrt(2 T / pi).
  const double ref = kMeanLocalTimeHalfLine * std::sqrt(horizon);
  const Estimate et = estimate_from(total);
  const Estimate eo = estimate_from(occ);
  rep.rows.push_back(info_row("mean_total_dl", et));
  rep.rows.push_back(info_row("reference.E_abs_B", Estimate{ref, 0.0, 1}));
  rep.rows.push_back(exact_row("rel_err_mean_dl", std::abs(et.mean - ref) / ref, 0.02));
  rep.rows.push_back(info_row("mean_occupation", eo));
  rep.rows.push_back(exact_row("occupation_rel_diff", std::abs(eo.mean - et.mean) / et.mean, 0.05));
  return rep;
}

}  // namespace rbm
