#pragma once

#include <vector>

#include "rbm/pathsim.hpp"

namespace rbm {

/// Time-ordered product of per-step factors along one path:
///   Q_{s,t} = A_s A_{s+1} ... A_{t-1},  Q_{s,s} = I.
/// The cocycle Q_{s,t} Q_{t,r} = Q_{s,r} holds by construction from the
/// shared factors.
struct MatrixPath {
  int base = 0;  // factors cover steps base .. base+factors.size()-1
  int dim = 0;
  std::vector<Mat> factors;

  int last() const { return base + static_cast<int>(factors.size()); }
  /// Ordered product over [s, t); requires base <= s <= t <= last().
  Mat q(int s, int t) const;
  /// Q_{s,t} for every s in [base, t]; out[s - base] = Q_{s,t}.
  /// One backward suffix sweep, O(n d^3).
  void suffix_products(int t, std::vector<Mat>& out) const;
};

/// Penalized functional Q^eps of the SDE
///   dQ = -Q { (1/2) R_u dt + (eps^{-1} P_u + II_u) dl },  Q_0 = I,
/// with exact symmetric matrix exponentials per step (the eps^{-1} P part is
/// stiff; Euler multipliers diverge for eps < dl). Boundary forms are
/// evaluated at the contact node.
MatrixPath evolve_q_eps(const Geometry& g, const PathSample& path, double eps);

/// The eps -> 0 limit functional: interior steps expm(-R dt / 2); contact
/// steps compose expm(-R dt / 2) expm(-II dl) (I - P), so Q annihilates the
/// transported normal direction from the contact on.
MatrixPath evolve_q_limit(const Geometry& g, const PathSample& path, int base = 0);

/// Checks the pathwise operator-norm bound
///   |Q_{0,t}| <= exp{ (1/2) K t + sigma l_t }
/// valid when Ric >= -K and II >= -sigma.
struct NormBoundReport {
  bool ok = true;
  double worst_margin = 0.0;  // max over nodes of |Q| - bound (<= 0 when ok)
  int worst_index = 0;
};
NormBoundReport q_norm_bound_check(const Geometry& g, const PathSample& path, const MatrixPath& q,
                                   double K, double sigma);

/// |Q_{s,t} Q_{t,r} - Q_{s,r}| for s <= t <= r.
double cocycle_check(const MatrixPath& q, int s, int t, int r);

}  // namespace rbm
