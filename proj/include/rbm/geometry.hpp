#pragma once

#include <stdexcept>
#include <string>

#include "rbm/linalg.hpp"

namespace rbm {

/// Manifold point in the geometry's global chart. Flat geometries use the
/// identity Euclidean chart; the hemisphere uses ambient R^3 coordinates
/// constrained to the unit sphere (no pole singularities).
struct Point {
  Vec c;
};

/// Orthonormal frame at a point: column i is the chart expression of u e_i.
/// chart_dim x dim (3x2 on the hemisphere, square elsewhere).
struct Frame {
  Mat m;
};

enum class GeomKind { HalfLine, Interval, HalfSpace, Disk, Hemisphere };

/// A step or projection fell outside the validity band of the scheme;
/// the caller should shrink dt.
class StepTooLargeError : public std::runtime_error {
 public:
  explicit StepTooLargeError(const std::string& what) : std::runtime_error(what) {}
};

/// Tolerance band for "point is on the boundary".
inline constexpr double kBoundaryTol = 1e-9;

class Geometry {
 public:
  /// "halfline" | "interval" | "halfspace:<d>" | "disk" | "hemisphere"
  static Geometry from_name(const std::string& name);
  static const char* valid_names();

  GeomKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  /// Intrinsic dimension d (Brownian increments are length d).
  int dim() const { return dim_; }
  /// Dimension of the chart coordinates (3 for the hemisphere).
  int chart_dim() const { return chart_dim_; }
  bool is_flat() const { return kind_ != GeomKind::Hemisphere; }

  /// Riemannian metric as a chart_dim x chart_dim Gram matrix. All catalog
  /// charts are Euclidean-isometric, so this is the identity; it is kept in
  /// the interface so frame orthonormality is always checked against it.
  Mat metric(const Point& x) const;

  /// Signed distance to the boundary: 0 on it, negative outside M.
  double boundary_distance(const Point& x) const;

  /// Inward unit normal at a boundary point (chart components).
  Vec inward_normal(const Point& x) const;

  struct Projection {
    Point x;
    double push;  // chart distance moved along the inward normal
  };
  /// Discrete Skorokhod push: interior points pass through, exterior points
  /// within the reach band return the nearest boundary point.
  Projection project_to_domain(const Point& y) const;

  /// R_u(a,b) = Ric(u a, u b).
  Mat ricci_in_frame(const Point& x, const Frame& u) const;
  /// II_u(a,b) = II(pi u a, pi u b), boundary point only; sign convention
  /// II(X,Y) = -<grad_X N, Y> so convex domains have II >= 0.
  Mat second_fundamental_in_frame(const Point& x, const Frame& u) const;
  /// P_u = v v^T with v = u^{-1} N, boundary point only.
  Mat normal_projection_in_frame(const Point& x, const Frame& u) const;

  /// Discrete parallel transport along the connecting geodesic.
  Frame transport_frame(const Point& from, const Point& to, const Frame& u) const;

  /// Geodesic step from x with tangent u xi; may land outside M, the caller
  /// projects.
  Point exp_step(const Point& x, const Frame& u, const Vec& xi) const;

  /// Canonical orthonormal frame at x (identity for flat charts).
  Frame standard_frame(const Point& x) const;
  /// Metric Gram-Schmidt on the frame columns (drift repair).
  Frame orthonormalize(const Point& x, const Frame& u) const;

  /// Maximum exterior push accepted by project_to_domain (0.25 x reach);
  /// +inf where nearest-point projection is globally unique.
  double reach_band() const;

  /// min over M of the Ricci eigenvalues (Ric >= -K requires K >= -this).
  double ricci_lower_bound() const;
  /// min over dM of the II eigenvalues (II >= -sigma requires sigma >= -this).
  double ii_lower_bound() const;

  /// Default start point used by the CLI when none is configured.
  Point default_start() const;

  bool contains(const Point& x) const { return boundary_distance(x) >= -kBoundaryTol; }

 private:
  Geometry(GeomKind kind, int dim, std::string name);
  void require_inside(const Point& x, const char* op) const;
  void require_boundary(const Point& x, const char* op) const;

  GeomKind kind_;
  int dim_;
  int chart_dim_;
  std::string name_;
};

}  // namespace rbm
