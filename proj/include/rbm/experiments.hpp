#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rbm/flows.hpp"
#include "rbm/gradient.hpp"
#include "rbm/oracles.hpp"
#include "rbm/report.hpp"

namespace rbm {

/// One (F, h) member of an integration-by-parts battery.
struct IbpMember {
  CylindricalFunction f;
  CameronMartinDirection h;
};

/// Theorem-2.1 check with three paired estimators on common noise:
///   A = mean D_h F, B(eps) = mean flow difference quotient,
///   C = mean F(X) sum <hdot, dB>.
/// Reports A - C (paired z) and the eps-extrapolated B - C.
ExperimentReport ibp_check(const Geometry& g, const Point& x0, const Frame& u0,
                           const TimeGrid& grid, const CylindricalFunction& f,
                           const CameronMartinDirection& h, std::span<const double> eps_list,
                           int n_paths, RandomSource rng);

/// Battery driver; shares the base ensemble and dedupes perturbed ensembles
/// by direction, producing numbers identical to per-member ibp_check calls.
std::vector<ExperimentReport> ibp_battery(const Geometry& g, const Point& x0, const Frame& u0,
                                          const TimeGrid& grid, std::span<const IbpMember> members,
                                          std::span<const double> eps_list, int n_paths,
                                          RandomSource rng);

/// Default 5-member battery used by the acceptance suite.
std::vector<IbpMember> default_ibp_battery(const Geometry& g, double horizon);

/// Bismut formula <v, grad P_t f(x)> = E[f(X_t) int <Q_s^* hdot, dB_s>] with
/// hdot = u0^{-1} v / t. 1D geometries compare against the kernel-oracle
/// gradient; others against a common-noise central finite difference at
/// x +- delta u0 v.
ExperimentReport bismut_check(const Geometry& g, const Point& x0, const Frame& u0,
                              const TimeGrid& grid, const ScalarFunction& f, const Vec& v_frame,
                              double delta, int n_paths, RandomSource rng);

/// E[Q_{0,s} dP_{t-s} f(X_s)] constant over probe times (half-line).
ExperimentReport martingale_check(const Point& x0, const TimeGrid& grid, const ScalarFunction& f,
                                  std::span<const double> probe_fractions, int n_paths,
                                  RandomSource rng);

/// Clark-Ocone residual rho = F - mean F - sum dP_{T-t}f(X_t) db_t on the
/// half-line or interval; reports E[rho^2]/Var F at dt and dt/2.
ExperimentReport clark_ocone_check(GeomKind kind, const Point& x0, double horizon, double dt,
                                   const ScalarFunction& f, int n_paths, RandomSource rng);

/// Log-Sobolev: per battery member, Ent(F^2) <= 2 E||DF||_H^2 within 3
/// combined SE after empirical normalization mean F^2 = 1.
ExperimentReport lsi_check(const Geometry& g, const Point& x0, const Frame& u0,
                           const TimeGrid& grid, std::span<const CylindricalFunction> battery,
                           int n_paths, RandomSource rng);

/// Default LSI battery (5 members, 1-3 time points).
std::vector<CylindricalFunction> default_lsi_battery(const Geometry& g, double horizon);

/// Remark 2.1 on M = [0,1], x0 = 0, h_t = t, F = gamma_1: pathwise flow
/// quotients go negative on a positive fraction of paths while D_h F >= 0,
/// yet the means agree.
ExperimentReport counterexample_demo(const TimeGrid& grid, int n_paths, RandomSource rng);

/// Girsanov mean-one check plus the quasi-invariance comparison for each eps.
ExperimentReport girsanov_check(const Geometry& g, const Point& x0, const Frame& u0,
                                const TimeGrid& grid, const CameronMartinDirection& h,
                                std::span<const double> eps_list, int n_paths, RandomSource rng);

/// Multiplicative-functional diagnostics: 1D exactness, cocycle deviation,
/// operator-norm bounds, eps-ladder convergence and boundary annihilation.
ExperimentReport qcheck(const Geometry& g, const Point& x0, const Frame& u0, const TimeGrid& grid,
                        std::span<const double> eps_ladder, int n_paths, RandomSource rng);

/// Half-line local-time calibration from x0 = 0: mean total dl against
/// E|B_T| and the occupation-band estimate against the pushed local time.
ExperimentReport local_time_calibration(double horizon, double dt, double band, int n_paths,
                                        RandomSource rng);

}  // namespace rbm
