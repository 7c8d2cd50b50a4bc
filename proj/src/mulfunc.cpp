#include "rbm/mulfunc.hpp"

#include <cmath>
#include <stdexcept>

namespace rbm {

Mat MatrixPath::q(int s, int t) const {
  if (s < base || t > last() || s > t) throw std::out_of_range("MatrixPath::q: bad index range");
  Mat acc = Mat::Identity(dim, dim);
  for (int k = s; k < t; ++k) acc = acc * factors[k - base];
  return acc;
}

void MatrixPath::suffix_products(int t, std::vector<Mat>& out) const {
  if (t < base || t > last()) throw std::out_of_range("MatrixPath::suffix_products: bad index");
  out.assign(t - base + 1, Mat::Identity(dim, dim));
  for (int s = t - 1; s >= base; --s) out[s - base] = factors[s - base] * out[s - base + 1];
}

namespace {

// Shared per-step factor construction. Interior generator (1/2) R dt at the
// left node; boundary generator at the contact node, either folded into one
// exponential (penalized) or split with the hard projection (limit).
MatrixPath evolve(const Geometry& g, const PathSample& path, double eps, bool limit, int base) {
  const int n = path.n_steps();
  const int d = path.dim;
  if (base < 0 || base > n) throw std::out_of_range("evolve_q: base outside grid");
  MatrixPath mp;
  mp.base = base;
  mp.dim = d;
  mp.factors.reserve(n - base);
  const double dt = path.grid.dt();
  const bool flat = g.is_flat();

  for (int k = base; k < n; ++k) {
    Mat gen = Mat::Zero(d, d);
    bool interior_term = false;
    if (!flat) {
      gen = -0.5 * dt * g.ricci_in_frame(path.x[k], path.frame(k));
      interior_term = true;
    }
    const double dl = path.dl[k + 1];
    if (dl > 0.0) {
      const Point& xc = path.x[k + 1];
      const Frame& uc = path.frame(k + 1);
      const Mat p = g.normal_projection_in_frame(xc, uc);
      const Mat ii = g.second_fundamental_in_frame(xc, uc);
      if (!limit) {
        gen -= dl * (p / eps + ii);
        mp.factors.push_back(expm_symmetric(gen));
      } else {
        Mat f = expm_symmetric(Mat(-dl * ii)) * (Mat::Identity(d, d) - p);
        if (interior_term) f = expm_symmetric(gen) * f;
        mp.factors.push_back(f);
      }
    } else {
      mp.factors.push_back(interior_term ? expm_symmetric(gen) : Mat::Identity(d, d));
    }
  }
  return mp;
}

}  // namespace

MatrixPath evolve_q_eps(const Geometry& g, const PathSample& path, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("evolve_q_eps: eps must be positive");
  return evolve(g, path, eps, false, 0);
}

MatrixPath evolve_q_limit(const Geometry& g, const PathSample& path, int base) {
  return evolve(g, path, 0.0, true, base);
}

NormBoundReport q_norm_bound_check(const Geometry& g, const PathSample& path, const MatrixPath& q,
                                   double K, double sigma) {
  if (K < -g.ricci_lower_bound())
    throw std::invalid_argument("q_norm_bound_check: K too small for the Ricci bound of " + g.name());
  if (sigma < -g.ii_lower_bound())
    throw std::invalid_argument("q_norm_bound_check: sigma too small for the II bound of " + g.name());
  if (q.base != 0) throw std::invalid_argument("q_norm_bound_check: needs a base-0 MatrixPath");

  NormBoundReport rep;
  const int n = q.last();
  Mat acc = Mat::Identity(q.dim, q.dim);
  double ltime = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) {
      acc = acc * q.factors[k - 1];
      ltime += path.dl[k];
    }
    const double bound = std::exp(0.5 * K * path.grid.time(k) + sigma * ltime);
    const double margin = operator_norm(acc) - bound;
    if (margin > rep.worst_margin || k == 0) {
      rep.worst_margin = margin;
      rep.worst_index = k;
    }
    if (margin > 1e-10) rep.ok = false;
  }
  return rep;
}

double cocycle_check(const MatrixPath& q, int s, int t, int r) {
  if (!(s <= t && t <= r)) throw std::invalid_argument("cocycle_check: need s <= t <= r");
  return operator_norm(Mat(q.q(s, t) * q.q(t, r) - q.q(s, r)));
}

}  // namespace rbm
