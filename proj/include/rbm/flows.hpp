#pragma once

#include <string>
#include <vector>

#include "rbm/gradient.hpp"

namespace rbm {

/// Girsanov density R^{eps,h} of the quasi-invariant flow, kept in log form.
struct GirsanovWeight {
  double log_value = 0.0;
  double value() const;
};

/// log R = eps sum <hdot_k, db_k> - (eps^2/2) sum |hdot_k|^2 dt, with hdot
/// evaluated at the left endpoint along the given path (adapted convention).
GirsanovWeight girsanov_weight(const Geometry& g, const PathSample& path,
                               const CameronMartinDirection& h, double eps);

/// One comparison row of the quasi-invariance test.
struct QuasiInvarianceRow {
  std::string quantity;
  double value = 0.0;      // distance or |z|
  double threshold = 0.0;  // pass iff value <= threshold
  bool pass = true;
};

struct QuasiInvarianceReport {
  bool conclusive = true;  // false when the importance weights degenerate
  double ess = 0.0;        // effective sample size of the weights
  std::vector<QuasiInvarianceRow> rows;
  bool pass() const;
};

/// Compares the law of X weighted by R^{eps,h} against the law of X^{eps,h}:
/// first two moments (z-tests) and weighted KS of each chart coordinate at
/// probe times {T/4, T/2, T}. Refuses to conclude when the effective sample
/// size falls below half the ensemble.
QuasiInvarianceReport quasi_invariance_test(const Geometry& g, const Point& x0, const Frame& u0,
                                            const TimeGrid& grid, const CameronMartinDirection& h,
                                            double eps, int n_paths, RandomSource rng);

}  // namespace rbm
