#include "rbm/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rbm {

namespace {

// Chart basis vector e_j, projected to the tangent plane on the hemisphere
// (covector-to-vector raising in the ambient chart).
Vec raised_axis(const Geometry& g, int j, const Point& x) {
  Vec e = Vec::Zero(g.chart_dim());
  e(j) = 1.0;
  if (!g.is_flat()) e -= e.dot(x.c) * x.c;
  return e;
}

void check_axis(const Geometry& g, int j) {
  if (j < 0 || j >= g.chart_dim())
    throw std::invalid_argument("cylindrical function: coordinate index out of range");
}

std::vector<double> parse_times(const std::string& spec) {
  std::vector<double> ts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) ts.push_back(std::stod(tok));
  if (ts.empty()) throw std::invalid_argument("selector: empty time list");
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] <= ts[i - 1]) throw std::invalid_argument("selector: times must be strictly increasing");
  return ts;
}

// "<head>@t=<t1>[,<t2>...]" -> (head, times)
std::pair<std::string, std::vector<double>> split_selector(const std::string& s) {
  const auto at = s.find("@t=");
  if (at == std::string::npos) throw std::invalid_argument("selector needs @t=<times>: " + s);
  return {s.substr(0, at), parse_times(s.substr(at + 3))};
}

std::vector<std::string> split_fields(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ':')) out.push_back(tok);
  return out;
}

}  // namespace

CylindricalFunction::CylindricalFunction(std::string name, std::vector<double> times, EvalFn eval,
                                         GradFn grad)
    : name_(std::move(name)), times_(std::move(times)), eval_(std::move(eval)), grad_(std::move(grad)) {
  if (times_.empty()) throw std::invalid_argument("cylindrical function needs at least one time");
  for (std::size_t i = 1; i < times_.size(); ++i)
    if (times_[i] <= times_[i - 1])
      throw std::invalid_argument("cylindrical function times must be strictly increasing");
}

CylindricalFunction CylindricalFunction::coordinate(const Geometry& g, int j, double t) {
  check_axis(g, j);
  return CylindricalFunction(
      "coord:" + std::to_string(j), {t},
      [j](std::span<const Point> a) { return a[0].c(j); },
      [g, j](int, std::span<const Point> a) { return raised_axis(g, j, a[0]); });
}

CylindricalFunction CylindricalFunction::quadratic(const Geometry& g, int j, double t) {
  check_axis(g, j);
  return CylindricalFunction(
      "quad:" + std::to_string(j), {t},
      [j](std::span<const Point> a) { return a[0].c(j) * a[0].c(j); },
      [g, j](int, std::span<const Point> a) { return Vec(2.0 * a[0].c(j) * raised_axis(g, j, a[0])); });
}

CylindricalFunction CylindricalFunction::bump(const Geometry& g, int j, double center, double width,
                                              double t) {
  check_axis(g, j);
  if (width <= 0.0) throw std::invalid_argument("bump width must be positive");
  auto val = [j, center, width](std::span<const Point> a) {
    const double s = (a[0].c(j) - center) / width;
    return std::exp(-s * s);
  };
  return CylindricalFunction(
      "bump:" + std::to_string(j), {t}, val,
      [g, j, center, width, val](int, std::span<const Point> a) {
        const double s = (a[0].c(j) - center) / width;
        return Vec((-2.0 * s / width) * val(a) * raised_axis(g, j, a[0]));
      });
}

CylindricalFunction CylindricalFunction::product(const Geometry& g, int j, double t1, double t2) {
  check_axis(g, j);
  return CylindricalFunction(
      "prod:" + std::to_string(j), {t1, t2},
      [j](std::span<const Point> a) { return a[0].c(j) * a[1].c(j); },
      [g, j](int i, std::span<const Point> a) {
        return Vec(a[1 - i].c(j) * raised_axis(g, j, a[i]));
      });
}

CylindricalFunction CylindricalFunction::mix3(const Geometry& g, int j, double t1, double t2,
                                              double t3) {
  check_axis(g, j);
  return CylindricalFunction(
      "mix:" + std::to_string(j), {t1, t2, t3},
      [j](std::span<const Point> a) { return a[0].c(j) + a[1].c(j) * a[2].c(j); },
      [g, j](int i, std::span<const Point> a) {
        const double w = i == 0 ? 1.0 : (i == 1 ? a[2].c(j) : a[1].c(j));
        return Vec(w * raised_axis(g, j, a[i]));
      });
}

CylindricalFunction CylindricalFunction::constant(double c, double t) {
  return CylindricalFunction(
      "const", {t}, [c](std::span<const Point>) { return c; },
      [](int, std::span<const Point> a) { return Vec(Vec::Zero(a[0].c.size())); });
}

CylindricalFunction CylindricalFunction::affine(const Geometry& g, int j, double a, double b,
                                                double t) {
  check_axis(g, j);
  return CylindricalFunction(
      "affine:" + std::to_string(j), {t},
      [j, a, b](std::span<const Point> p) { return a + b * p[0].c(j); },
      [g, j, b](int, std::span<const Point> p) { return Vec(b * raised_axis(g, j, p[0])); });
}

CylindricalFunction CylindricalFunction::parse(const Geometry& g, const std::string& selector) {
  auto [head, ts] = split_selector(selector);
  const auto f = split_fields(head);
  const auto& kind = f.at(0);
  auto want_times = [&](std::size_t n) {
    if (ts.size() != n)
      throw std::invalid_argument("selector " + selector + ": expected " + std::to_string(n) + " time(s)");
  };
  if (kind == "coord") {
    want_times(1);
    return coordinate(g, std::stoi(f.at(1)), ts[0]);
  }
  if (kind == "quad") {
    want_times(1);
    return quadratic(g, std::stoi(f.at(1)), ts[0]);
  }
  if (kind == "bump") {
    want_times(1);
    return bump(g, std::stoi(f.at(1)), std::stod(f.at(2)), std::stod(f.at(3)), ts[0]);
  }
  if (kind == "prod") {
    want_times(2);
    return product(g, std::stoi(f.at(1)), ts[0], ts[1]);
  }
  if (kind == "mix") {
    want_times(3);
    return mix3(g, std::stoi(f.at(1)), ts[0], ts[1], ts[2]);
  }
  if (kind == "const") {
    want_times(1);
    return constant(std::stod(f.at(1)), ts[0]);
  }
  if (kind == "affine") {
    want_times(1);
    return affine(g, std::stoi(f.at(1)), std::stod(f.at(2)), std::stod(f.at(3)), ts[0]);
  }
  throw std::invalid_argument("unknown cylindrical function \"" + kind +
                              "\"; valid: coord | quad | bump | prod | mix | const | affine");
}

std::vector<int> CylindricalFunction::grid_indices(const TimeGrid& grid) const {
  std::vector<int> idx;
  idx.reserve(times_.size());
  for (double t : times_) {
    const int k = grid.index_of(t);
    if (k == 0) throw std::invalid_argument("cylindrical function times must lie in (0, T]");
    idx.push_back(k);
  }
  return idx;
}

double CylindricalFunction::eval_on(const PathSample& path) const {
  const auto idx = grid_indices(path.grid);
  std::vector<Point> args;
  args.reserve(idx.size());
  for (int k : idx) args.push_back(path.x[k]);
  return eval_(args);
}

std::vector<Vec> CylindricalFunction::frame_gradients(const PathSample& path) const {
  const auto idx = grid_indices(path.grid);
  std::vector<Point> args;
  args.reserve(idx.size());
  for (int k : idx) args.push_back(path.x[k]);
  std::vector<Vec> vs;
  vs.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Vec w = grad_(static_cast<int>(i), args);
    vs.push_back(Vec(path.frame(idx[i]).m.transpose() * w));
  }
  return vs;
}

CameronMartinDirection CameronMartinDirection::zero(int dim) {
  return CameronMartinDirection{"zero", true, 0.0,
                                [dim](const StepContext&) { return Vec(Vec::Zero(dim)); }};
}

CameronMartinDirection CameronMartinDirection::linear(int dim, int j) {
  if (j < 0 || j >= dim) throw std::invalid_argument("linear direction: bad component");
  return CameronMartinDirection{"linear:" + std::to_string(j), true,
                                std::numeric_limits<double>::quiet_NaN(),  // set by parse/horizon
                                [dim, j](const StepContext&) {
                                  Vec v = Vec::Zero(dim);
                                  v(j) = 1.0;
                                  return v;
                                }};
}

CameronMartinDirection CameronMartinDirection::sine(int dim, int j, double horizon) {
  if (j < 0 || j >= dim) throw std::invalid_argument("sin direction: bad component");
  const double om = 3.14159265358979323846 / horizon;
  return CameronMartinDirection{"sin:" + std::to_string(j), true, std::sqrt(horizon / 2.0) * om,
                                [dim, j, om](const StepContext& ctx) {
                                  Vec v = Vec::Zero(dim);
                                  v(j) = std::cos(om * ctx.t);
                                  return v;
                                }};
}

CameronMartinDirection CameronMartinDirection::tanh_adapted(int dim, int j, double center,
                                                            double horizon) {
  // Reads chart coordinate j, drives the frame slot min(j, d-1): the chart
  // can have more coordinates than the frame on the hemisphere.
  const int slot = std::min(j, dim - 1);
  return CameronMartinDirection{"tanh:" + std::to_string(j), false, std::sqrt(horizon),
                                [dim, j, slot, center](const StepContext& ctx) {
                                  Vec v = Vec::Zero(dim);
                                  v(slot) = std::tanh(2.0 * (ctx.x.c(j) - center));
                                  return v;
                                }};
}

CameronMartinDirection CameronMartinDirection::sgn_adapted(int dim, int j, double center,
                                                           double horizon) {
  const int slot = std::min(j, dim - 1);
  return CameronMartinDirection{"sgn:" + std::to_string(j), false, std::sqrt(horizon),
                                [dim, j, slot, center](const StepContext& ctx) {
                                  Vec v = Vec::Zero(dim);
                                  v(slot) = ctx.x.c(j) >= center ? 1.0 : -1.0;
                                  return v;
                                }};
}

CameronMartinDirection CameronMartinDirection::constant(const Vec& rate, double horizon,
                                                        std::string name) {
  return CameronMartinDirection{std::move(name), true, rate.norm() * std::sqrt(horizon),
                                [rate](const StepContext&) { return rate; }};
}

CameronMartinDirection CameronMartinDirection::parse(const Geometry& g, const std::string& selector,
                                                     double horizon) {
  const auto f = split_fields(selector);
  const auto& kind = f.at(0);
  const int d = g.dim();
  if (kind == "zero") return zero(d);
  if (kind == "linear") {
    auto h = linear(d, f.size() > 1 ? std::stoi(f.at(1)) : 0);
    h.h_norm_bound = std::sqrt(horizon);
    return h;
  }
  if (kind == "sin") return sine(d, f.size() > 1 ? std::stoi(f.at(1)) : 0, horizon);
  if (kind == "tanh") {
    const int j = f.size() > 1 ? std::stoi(f.at(1)) : 0;
    const double c = f.size() > 2 ? std::stod(f.at(2)) : 0.5;
    if (j < 0 || j >= g.chart_dim()) throw std::invalid_argument("tanh direction: bad coordinate");
    return tanh_adapted(d, j, c, horizon);
  }
  if (kind == "sgn") {
    const int j = f.size() > 1 ? std::stoi(f.at(1)) : 0;
    const double c = f.size() > 2 ? std::stod(f.at(2)) : 0.5;
    if (j < 0 || j >= g.chart_dim()) throw std::invalid_argument("sgn direction: bad coordinate");
    return sgn_adapted(d, j, c, horizon);
  }
  throw std::invalid_argument("unknown direction \"" + kind +
                              "\"; valid: zero | linear:<j> | sin:<j> | tanh:<j>:<c> | sgn:<j>:<c>");
}

double HVector::norm_sq() const {
  double s = 0.0;
  for (const Vec& v : deriv) s += v.squaredNorm();
  return s * dt;
}

double HVector::inner(const HVector& other) const {
  if (deriv.size() != other.deriv.size()) throw std::invalid_argument("HVector::inner: grid mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < deriv.size(); ++k) s += deriv[k].dot(other.deriv[k]);
  return s * dt;
}

HVector damped_gradient(const Geometry& g, const CylindricalFunction& f, const PathSample& path,
                        const MatrixPath& q) {
  const int n = path.n_steps();
  if (q.base != 0 || q.last() != n)
    throw std::invalid_argument("damped_gradient: MatrixPath must cover the whole grid from 0");
  const auto idx = f.grid_indices(path.grid);
  const auto vs = f.frame_gradients(path);
  (void)g;

  HVector out;
  out.dt = path.grid.dt();
  out.deriv.assign(n, Vec::Zero(path.dim));

  // v_(m) lookup: times are strictly increasing, at most one argument per node.
  auto v_at = [&](int m) -> Vec {
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (idx[i] == m) return vs[i];
    return Vec::Zero(path.dim);
  };

  // Backward sweep: r = sum_{i: t_i >= t_{k+1}} Q_{k+1, t_i} v_i, then
  // g_k = A_k r.
  Vec r = Vec::Zero(path.dim);
  for (int k = n - 1; k >= 0; --k) {
    if (k == n - 1) {
      r = v_at(n);
    } else {
      r = v_at(k + 1) + Vec(q.factors[k + 1] * r);
    }
    out.deriv[k] = q.factors[k] * r;
  }
  return out;
}

double directional_derivative(const Geometry& g, const CylindricalFunction& f,
                              const PathSample& path, const CameronMartinDirection& h,
                              const MatrixPath& q) {
  const HVector df = damped_gradient(g, f, path, q);
  const double dt = path.grid.dt();
  double acc = 0.0;
  double ltime = 0.0;
  for (int k = 0; k < path.n_steps(); ++k) {
    const StepContext ctx{g, path.x[k], path.frame(k), k, path.grid.time(k), ltime};
    acc += df.deriv[k].dot(h.hdot(ctx)) * dt;
    ltime += path.dl[k + 1];
  }
  return acc;
}

double flow_difference_quotient(const Geometry& g, const CylindricalFunction& f, const Point& x0,
                                const Frame& u0, const TimeGrid& grid,
                                const CameronMartinDirection& h, double eps, RandomSource rng) {
  if (eps <= 0.0) throw std::invalid_argument("flow_difference_quotient: eps must be positive");
  PathSample base, pert;
  paired_simulate(g, x0, u0, grid, h.drift(), eps, rng, base, pert);
  return (f.eval_on(pert) - f.eval_on(base)) / eps;
}

}  // namespace rbm
