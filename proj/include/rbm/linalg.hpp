#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace rbm {

// All tangent/chart dimensions in the geometry catalog are <= 6
// (hemisphere chart is ambient R^3, halfspace:<d> is capped at 6).
// Fixed-capacity dynamic types keep hot loops free of heap traffic.
inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// exp(A) for symmetric A via eigendecomposition (exact for the stiff
/// rank-one penalization; no order condition like Pade/Euler).
inline Mat expm_symmetric(const Mat& a) {
  const auto n = a.rows();
  if (n == 1) {
    Mat r(1, 1);
    r(0, 0) = std::exp(a(0, 0));
    return r;
  }
  // Diagonal fast path (flat geometries, constant-curvature Ricci term).
  bool diag = true;
  for (Eigen::Index i = 0; i < n && diag; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && a(i, j) != 0.0) {
        diag = false;
        break;
      }
  if (diag) {
    Mat r = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) r(i, i) = std::exp(a(i, i));
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Vec ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i) ev(i) = std::exp(ev(i));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Largest singular value. For 1x1 this is |a|.
inline double operator_norm(const Mat& a) {
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  Mat ata = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Mat> es(ata, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  return lmax > 0.0 ? std::sqrt(lmax) : 0.0;
}

/// Re-orthonormalize the columns of `cols` against the Gram matrix `g`
/// (modified Gram-Schmidt in the metric <a,b> = a^T g b).
inline Mat gram_schmidt(const Mat& cols, const Mat& g) {
  Mat u = cols;
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double proj = u.col(i).dot(g * u.col(j));
      u.col(j) -= proj * u.col(i);
    }
    const double nrm = std::sqrt(u.col(j).dot(g * u.col(j)));
    u.col(j) /= nrm;
  }
  return u;
}

}  // namespace rbm
