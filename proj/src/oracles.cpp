#include "rbm/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "rbm/stats.hpp"

namespace rbm {

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;

double gauss_pdf(double z, double t) { return std::exp(-z * z / (2.0 * t)) / (kSqrt2Pi * std::sqrt(t)); }
double gauss_cdf(double z, double t) { return 0.5 * std::erfc(-z / std::sqrt(2.0 * t)); }

void check_1d(const KernelSpec& spec, double t, const char* op) {
  if (spec.geometry != GeomKind::HalfLine && spec.geometry != GeomKind::Interval)
    throw std::invalid_argument(std::string(op) + ": kernel oracle covers halfline and interval only");
  if (t <= 0.0) throw std::invalid_argument(std::string(op) + ": t must be positive");
}

// Image range so that dropped terms are below ~1e-14: images live at spacing
// 2, Gaussians are negligible past 8 standard deviations.
int image_range(double t) { return static_cast<int>(std::ceil((8.0 * std::sqrt(t) + 3.0) / 2.0)); }

// Adaptive Simpson quadrature.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

double kernel_dx(const KernelSpec& spec, double t, double x, double y) {
  if (spec.geometry == GeomKind::HalfLine) {
    return -((x - y) / t) * gauss_pdf(x - y, t) - ((x + y) / t) * gauss_pdf(x + y, t);
  }
  const int kk = image_range(t);
  double s = 0.0;
  for (int k = -kk; k <= kk; ++k) {
    const double zm = x - y + 2.0 * k;
    const double zp = x + y + 2.0 * k;
    s += -(zm / t) * gauss_pdf(zm, t) - (zp / t) * gauss_pdf(zp, t);
  }
  return s;
}

}  // namespace

ScalarFunction ScalarFunction::coordinate() {
  return {"coord", [](double y) { return y; }, [](double) { return 1.0; }};
}

ScalarFunction ScalarFunction::quadratic() {
  return {"quad", [](double y) { return y * y; }, [](double y) { return 2.0 * y; }};
}

ScalarFunction ScalarFunction::bump(double c, double w) {
  if (w <= 0.0) throw std::invalid_argument("bump width must be positive");
  return {"bump",
          [c, w](double y) {
            const double s = (y - c) / w;
            return std::exp(-s * s);
          },
          [c, w](double y) {
            const double s = (y - c) / w;
            return -2.0 * s / w * std::exp(-s * s);
          }};
}

ScalarFunction ScalarFunction::constant(double c) {
  return {"const", [c](double) { return c; }, [](double) { return 0.0; }};
}

ScalarFunction ScalarFunction::parse(const std::string& selector) {
  std::stringstream ss(selector);
  std::string kind;
  std::getline(ss, kind, ':');
  if (kind == "coord") return coordinate();
  if (kind == "quad") return quadratic();
  if (kind == "bump") {
    std::string c, w;
    std::getline(ss, c, ':');
    std::getline(ss, w, ':');
    return bump(c.empty() ? 0.5 : std::stod(c), w.empty() ? 0.25 : std::stod(w));
  }
  if (kind == "const") {
    std::string c;
    std::getline(ss, c, ':');
    return constant(c.empty() ? 1.0 : std::stod(c));
  }
  throw std::invalid_argument("unknown 1d function \"" + selector +
                              "\"; valid: coord | quad | bump:<c>:<w> | const:<c>");
}

double neumann_kernel(const KernelSpec& spec, double t, double x, double y) {
  check_1d(spec, t, "neumann_kernel");
  if (spec.geometry == GeomKind::HalfLine) return gauss_pdf(x - y, t) + gauss_pdf(x + y, t);
  const int kk = image_range(t);
  double s = 0.0;
  for (int k = -kk; k <= kk; ++k)
    s += gauss_pdf(x - y + 2.0 * k, t) + gauss_pdf(x + y + 2.0 * k, t);
  return s;
}

double neumann_kernel_cdf(const KernelSpec& spec, double t, double x, double y) {
  check_1d(spec, t, "neumann_kernel_cdf");
  if (spec.geometry == GeomKind::HalfLine) {
    if (y <= 0.0) return 0.0;
    return gauss_cdf(y - x, t) - gauss_cdf(-x, t) + gauss_cdf(y + x, t) - gauss_cdf(x, t);
  }
  const double yy = std::clamp(y, 0.0, 1.0);
  const int kk = image_range(t);
  double s = 0.0;
  for (int k = -kk; k <= kk; ++k) {
    s += gauss_cdf(yy - x + 2.0 * k, t) - gauss_cdf(-x + 2.0 * k, t);
    s += gauss_cdf(yy + x + 2.0 * k, t) - gauss_cdf(x + 2.0 * k, t);
  }
  return s;
}

double neumann_value(const KernelSpec& spec, double t, double x, const ScalarFunction& f) {
  check_1d(spec, t, "neumann_value");
  if (spec.geometry == GeomKind::HalfLine) {
    if (f.name == "coord") {
      // E|x + sqrt(t) Z|
      const double s = std::sqrt(t);
      return x * (2.0 * gauss_cdf(x, t) - 1.0) + 2.0 * s * s * gauss_pdf(x, t);
    }
    if (f.name == "quad") return x * x + t;
    if (f.name == "const") return f.f(0.0);
    const double upper = x + 10.0 * std::sqrt(t) + 10.0;
    return integrate([&](double y) { return f.f(y) * neumann_kernel(spec, t, x, y); }, 0.0, upper,
                     1e-10);
  }
  if (f.name == "const") return f.f(0.0);
  return integrate([&](double y) { return f.f(y) * neumann_kernel(spec, t, x, y); }, 0.0, 1.0, 1e-10);
}

double neumann_gradient(const KernelSpec& spec, double t, double x, const ScalarFunction& f) {
  check_1d(spec, t, "neumann_gradient");
  if (f.name == "const") return 0.0;
  if (spec.geometry == GeomKind::HalfLine) {
    if (f.name == "coord") return 2.0 * gauss_cdf(x, t) - 1.0;
    if (f.name == "quad") return 2.0 * x;
    const double upper = x + 10.0 * std::sqrt(t) + 10.0;
    return integrate([&](double y) { return f.f(y) * kernel_dx(spec, t, x, y); }, 0.0, upper, 1e-10);
  }
  return integrate([&](double y) { return f.f(y) * kernel_dx(spec, t, x, y); }, 0.0, 1.0, 1e-10);
}

PathSample exact_reflected_path_1d(const TimeGrid& grid, RandomSource rng) {
  const int n = grid.n_steps;
  const double sqdt = std::sqrt(grid.dt());
  const GaussianStream gs(rng);

  PathSample p;
  p.grid = grid;
  p.dim = 1;
  p.chart_dim = 1;
  p.frames_constant = true;
  p.frames.assign(1, Frame{Mat::Identity(1, 1)});
  p.x.assign(n + 1, Point{Vec::Zero(1)});
  p.db.assign(n, Vec::Zero(1));
  p.dl.assign(n + 1, 0.0);
  p.contact.assign(n + 1, 0);
  p.contact[0] = 1;

  double b = 0.0;
  double prev_abs = 0.0;
  for (int k = 0; k < n; ++k) {
    double z0, z1;
    gs.normal_pair(static_cast<std::uint32_t>(k), 0, z0, z1);
    const double db = sqdt * z0;
    const double sgn = b >= 0.0 ? 1.0 : -1.0;  // sgn(0) := +1
    b += db;
    p.db[k](0) = db;
    p.x[k + 1].c(0) = std::abs(b);
    // Tanaka increment; nondecreasing only up to O(sqrt(dt)) slack.
    p.dl[k + 1] = std::abs(b) - prev_abs - sgn * db;
    prev_abs = std::abs(b);
    p.contact[k + 1] = std::abs(b) < kBoundaryTol ? 1 : 0;
  }
  return p;
}

double explicit_q_1d(const PathSample& path, int s, int t) {
  if (path.dim != 1) throw std::invalid_argument("explicit_q_1d: 1D paths only");
  if (!(0 <= s && s <= t && t <= path.n_steps())) throw std::out_of_range("explicit_q_1d: bad range");
  return path.local_time(s, t) == 0.0 ? 1.0 : 0.0;
}

namespace {

// |.| for the half-line, tent map with period 2 for the interval.
double fold_halfline(double w) { return std::abs(w); }
double fold_interval(double w) {
  double m = std::fmod(w, 2.0);
  if (m < 0.0) m += 2.0;
  return 1.0 - std::abs(1.0 - m);
}

}  // namespace

MirrorFlowPair mirror_flow_pair_1d(GeomKind kind, const TimeGrid& grid,
                                   const std::function<double(double)>& hdot, double eps,
                                   RandomSource rng) {
  if (kind != GeomKind::HalfLine && kind != GeomKind::Interval)
    throw std::invalid_argument("mirror_flow_pair_1d: halfline or interval only");
  const bool interval = kind == GeomKind::Interval;
  const int n = grid.n_steps;
  const double dt = grid.dt();
  const double sqdt = std::sqrt(dt);
  const GaussianStream gs(rng);

  MirrorFlowPair out;
  out.bhat.assign(n + 1, 0.0);
  out.base.assign(n + 1, 0.0);
  out.pert.assign(n + 1, 0.0);
  out.crossing.assign(n + 1, 0);

  auto fold = [interval](double w) { return interval ? fold_interval(w) : fold_halfline(w); };

  double w = 0.0, h = 0.0;
  out.base[0] = fold(0.0);
  out.pert[0] = fold(0.0);
  for (int k = 0; k < n; ++k) {
    double z0, z1;
    gs.normal_pair(static_cast<std::uint32_t>(k), 0, z0, z1);
    h += hdot(grid.time(k)) * dt;
    const double w_prev = w;
    w += sqdt * z0;
    out.bhat[k + 1] = w;
    out.base[k + 1] = fold(w);
    out.pert[k + 1] = fold(w + eps * h);

    // Contact of the base path in (t_k, t_{k+1}] = crease crossing of bhat.
    // Creases: integers for the interval, 0 for the half-line.
    bool crossed = false;
    if (interval) {
      crossed = std::floor(w_prev) != std::floor(w);
    } else {
      crossed = (w_prev > 0.0) != (w > 0.0);
    }
    if (!crossed && out.base[k + 1] < kBoundaryTol) crossed = true;
    if (!crossed) {
      // Same bin: bridge may still have touched the adjacent creases.
      double p = 0.0;
      if (interval) {
        const double lo = std::floor(w);
        const double p_lo = std::exp(-2.0 * (w_prev - lo) * (w - lo) / dt);
        const double p_hi = std::exp(-2.0 * (lo + 1.0 - w_prev) * (lo + 1.0 - w) / dt);
        p = p_lo + p_hi - p_lo * p_hi;
      } else {
        p = std::exp(-2.0 * w_prev * w / dt);
      }
      double u0, u1;
      gs.uniform_pair(static_cast<std::uint32_t>(k), 1u << 20, u0, u1);
      crossed = u0 < p;
    }
    out.crossing[k + 1] = crossed ? 1 : 0;
    if (crossed) out.last_crossing = k + 1;
  }
  return out;
}

}  // namespace rbm
