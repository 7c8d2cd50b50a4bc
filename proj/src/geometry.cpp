#include "rbm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rbm {

namespace {

constexpr double kPi = 3.14159265358979323846;

int parse_halfspace_dim(const std::string& name) {
  const auto pos = name.find(':');
  if (pos == std::string::npos) throw std::invalid_argument("halfspace needs a dimension, e.g. halfspace:3");
  const int d = std::stoi(name.substr(pos + 1));
  if (d < 1 || d > kMaxDim)
    throw std::invalid_argument("halfspace dimension must be in [1, " + std::to_string(kMaxDim) + "]");
  return d;
}

}  // namespace

Geometry::Geometry(GeomKind kind, int dim, std::string name)
    : kind_(kind), dim_(dim), chart_dim_(kind == GeomKind::Hemisphere ? 3 : dim), name_(std::move(name)) {}

Geometry Geometry::from_name(const std::string& name) {
  if (name == "halfline") return Geometry(GeomKind::HalfLine, 1, name);
  if (name == "interval") return Geometry(GeomKind::Interval, 1, name);
  if (name == "disk") return Geometry(GeomKind::Disk, 2, name);
  if (name == "hemisphere") return Geometry(GeomKind::Hemisphere, 2, name);
  if (name.rfind("halfspace", 0) == 0) return Geometry(GeomKind::HalfSpace, parse_halfspace_dim(name), name);
  throw std::invalid_argument("unknown geometry \"" + name + "\"; valid: " + valid_names());
}

const char* Geometry::valid_names() { return "halfline | interval | halfspace:<d> | disk | hemisphere"; }

void Geometry::require_inside(const Point& x, const char* op) const {
  if (boundary_distance(x) < -kBoundaryTol)
    throw std::domain_error(std::string(op) + ": point outside " + name_);
}

void Geometry::require_boundary(const Point& x, const char* op) const {
  if (std::abs(boundary_distance(x)) > kBoundaryTol)
    throw std::invalid_argument(std::string(op) + ": point not on the boundary of " + name_);
}

Mat Geometry::metric(const Point& x) const {
  require_inside(x, "metric");
  return Mat::Identity(chart_dim_, chart_dim_);
}

double Geometry::boundary_distance(const Point& x) const {
  switch (kind_) {
    case GeomKind::HalfLine:
      return x.c(0);
    case GeomKind::Interval:
      return std::min(x.c(0), 1.0 - x.c(0));
    case GeomKind::HalfSpace:
      return x.c(0);
    case GeomKind::Disk:
      return 1.0 - x.c.norm();
    case GeomKind::Hemisphere:
      // Points live on the unit sphere; latitude is the geodesic distance
      // to the equator.
      return std::asin(std::clamp(x.c(2), -1.0, 1.0));
  }
  return 0.0;
}

Vec Geometry::inward_normal(const Point& x) const {
  require_boundary(x, "inward_normal");
  Vec n = Vec::Zero(chart_dim_);
  switch (kind_) {
    case GeomKind::HalfLine:
      n(0) = 1.0;
      break;
    case GeomKind::Interval:
      n(0) = x.c(0) < 0.5 ? 1.0 : -1.0;
      break;
    case GeomKind::HalfSpace:
      n(0) = 1.0;
      break;
    case GeomKind::Disk:
      n = -x.c / x.c.norm();
      break;
    case GeomKind::Hemisphere:
      n(2) = 1.0;  // tangent to the sphere at the equator, pointing up
      break;
  }
  return n;
}

Geometry::Projection Geometry::project_to_domain(const Point& y) const {
  const double d = boundary_distance(y);
  if (d >= 0.0) return Projection{y, 0.0};
  const double push = -d;
  if (push > reach_band())
    throw StepTooLargeError("project_to_domain: exterior point beyond the reach band of " + name_ +
                            " (push " + std::to_string(push) + "); reduce dt");
  Point x = y;
  switch (kind_) {
    case GeomKind::HalfLine:
    case GeomKind::HalfSpace:
      x.c(0) = 0.0;
      break;
    case GeomKind::Interval:
      x.c(0) = y.c(0) < 0.0 ? 0.0 : 1.0;
      break;
    case GeomKind::Disk:
      x.c = y.c / y.c.norm();
      break;
    case GeomKind::Hemisphere: {
      const double r = std::hypot(y.c(0), y.c(1));
      if (r < 1e-14)
        throw StepTooLargeError("project_to_domain: hemisphere point at the south pole has no nearest equator point");
      x.c(0) = y.c(0) / r;
      x.c(1) = y.c(1) / r;
      x.c(2) = 0.0;
      break;
    }
  }
  return Projection{x, push};
}

Mat Geometry::ricci_in_frame(const Point& x, const Frame&) const {
  require_inside(x, "ricci_in_frame");
  if (kind_ == GeomKind::Hemisphere) return Mat::Identity(dim_, dim_);  // Ric = (d-1) g on unit S^2
  return Mat::Zero(dim_, dim_);
}

Mat Geometry::second_fundamental_in_frame(const Point& x, const Frame& u) const {
  require_boundary(x, "second_fundamental_in_frame");
  switch (kind_) {
    case GeomKind::HalfLine:
    case GeomKind::Interval:
      return Mat::Zero(1, 1);  // dM is a point, pi projects to 0
    case GeomKind::HalfSpace:
    case GeomKind::Hemisphere:
      // Flat boundary / the equator is a geodesic of S^2.
      return Mat::Zero(dim_, dim_);
    case GeomKind::Disk: {
      // The unit circle has curvature 1: II(X,Y) = <pi X, pi Y>.
      const Vec n = inward_normal(x);
      Mat ii(dim_, dim_);
      for (int a = 0; a < dim_; ++a) {
        const Vec ta = u.m.col(a) - u.m.col(a).dot(n) * n;
        for (int b = a; b < dim_; ++b) {
          const Vec tb = u.m.col(b) - u.m.col(b).dot(n) * n;
          ii(a, b) = ii(b, a) = ta.dot(tb);
        }
      }
      return ii;
    }
  }
  return Mat::Zero(dim_, dim_);
}

Mat Geometry::normal_projection_in_frame(const Point& x, const Frame& u) const {
  require_boundary(x, "normal_projection_in_frame");
  const Vec n = inward_normal(x);
  Vec v(dim_);
  for (int a = 0; a < dim_; ++a) v(a) = u.m.col(a).dot(n);
  return v * v.transpose();
}

Frame Geometry::transport_frame(const Point& from, const Point& to, const Frame& u) const {
  if (is_flat()) return u;
  // Parallel transport on S^2 along the connecting great circle:
  //   T(w) = w - <p+q, w>/(1 + <p,q>) (p+q) + 2 <p, w> q.
  const Vec& p = from.c;
  const Vec& q = to.c;
  const double c = p.dot(q);
  if (c <= -1.0 + 1e-12)
    throw StepTooLargeError("transport_frame: antipodal transport on the sphere is degenerate");
  const Vec s = p + q;
  Frame out = u;
  for (int a = 0; a < dim_; ++a) {
    const Vec& w = u.m.col(a);
    out.m.col(a) = w - (s.dot(w) / (1.0 + c)) * s + 2.0 * p.dot(w) * q;
  }
  return out;
}

Point Geometry::exp_step(const Point& x, const Frame& u, const Vec& xi) const {
  if (is_flat()) {
    Point y = x;
    y.c += u.m * xi;
    // Keep single exterior projections well-posed.
    const double d = boundary_distance(y);
    if (d < -4.0 * std::max(reach_band(), 1.0) && reach_band() < 1e300)
      throw StepTooLargeError("exp_step: step far beyond the chart validity of " + name_);
    return y;
  }
  const Vec w = u.m * xi;  // tangent vector at x in ambient coordinates
  const double r = w.norm();
  if (r > 0.5 * kPi) throw StepTooLargeError("exp_step: hemisphere step exceeds chart validity; reduce dt");
  Point y = x;
  if (r > 0.0) y.c = std::cos(r) * x.c + (std::sin(r) / r) * w;
  return y;
}

Frame Geometry::standard_frame(const Point& x) const {
  require_inside(x, "standard_frame");
  if (is_flat()) return Frame{Mat::Identity(dim_, dim_)};
  // Project the ambient axes onto T_x S^2 and orthonormalize; pick the two
  // axes least aligned with x so the projection never degenerates.
  Eigen::Index skip = 0;
  x.c.cwiseAbs().maxCoeff(&skip);
  Mat cols(3, 2);
  int col = 0;
  for (int i = 0; i < 3 && col < 2; ++i) {
    if (i == skip) continue;
    Vec e = Vec::Zero(3);
    e(i) = 1.0;
    cols.col(col++) = e - e.dot(x.c) * x.c;
  }
  return Frame{gram_schmidt(cols, Mat::Identity(3, 3))};
}

Frame Geometry::orthonormalize(const Point& x, const Frame& u) const {
  Mat cols = u.m;
  if (!is_flat()) {
    // Re-pin the columns to the tangent plane before the Gram sweep.
    for (int a = 0; a < dim_; ++a) cols.col(a) -= cols.col(a).dot(x.c) * x.c;
  }
  return Frame{gram_schmidt(cols, Mat::Identity(chart_dim_, chart_dim_))};
}

double Geometry::reach_band() const {
  switch (kind_) {
    case GeomKind::HalfLine:
    case GeomKind::HalfSpace:
      return std::numeric_limits<double>::infinity();
    case GeomKind::Interval:
      return 0.25;  // clamp projection is unique for any exterior point; this caps one-step overshoot
    case GeomKind::Disk:
      return 0.25;
    case GeomKind::Hemisphere:
      return 0.25 * 0.5 * kPi;
  }
  return 0.0;
}

double Geometry::ricci_lower_bound() const { return kind_ == GeomKind::Hemisphere ? 1.0 : 0.0; }

double Geometry::ii_lower_bound() const { return 0.0; }

Point Geometry::default_start() const {
  Vec c = Vec::Zero(chart_dim_);
  switch (kind_) {
    case GeomKind::HalfLine:
      c(0) = 0.5;
      break;
    case GeomKind::Interval:
      c(0) = 0.5;
      break;
    case GeomKind::HalfSpace:
      c(0) = 0.5;
      break;
    case GeomKind::Disk:
      c(0) = 0.3;
      break;
    case GeomKind::Hemisphere:
      // Latitude 1.0 rad from the pole: contact-rich but interior.
      c(0) = std::sin(1.0);
      c(2) = std::cos(1.0);
      break;
  }
  return Point{c};
}

}  // namespace rbm
