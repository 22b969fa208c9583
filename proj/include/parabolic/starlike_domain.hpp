#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parabolic/errors.hpp"
#include "parabolic/implicit_solver.hpp"
#include "parabolic/lip_analysis.hpp"
#include "parabolic/point.hpp"
#include "parabolic/sampling.hpp"

namespace parabolic {

/// phi(s, omega) for s in the time window and omega on S^{n-1}.
using RadialFn = std::function<double(double s, std::span<const double> omega)>;

inline constexpr double kUnitTolerance = 1e-12;

inline void require_unit(std::span<const double> omega, const char* who) {
  if (std::abs(euclidean_norm(omega) - 1.0) > kUnitTolerance) {
    throw DomainError(std::string(who) + ": direction is not a unit vector");
  }
}

/// Omega = {(s, r omega) : 0 <= r < phi(s, omega)} over a finite time window,
/// with delta0 < phi < k0 and phi Lip(1,1/2) with constant m_const in the
/// chordal metric on the sphere.
class StarlikeDomain {
 public:
  StarlikeDomain(RadialFn radial, std::size_t spatial_dim, Interval window,
                 double delta0, double k0, double m_const)
      : radial_(std::move(radial)),
        n_(spatial_dim),
        window_(window),
        delta0_(delta0),
        k0_(k0),
        m_(m_const) {
    if (!radial_) throw DomainError("StarlikeDomain: missing radial function");
    if (n_ < 2) throw DomainError("StarlikeDomain: spatial dimension must be >= 2");
    if (!(window_.lo < window_.hi)) {
      throw DomainError("StarlikeDomain: empty time window");
    }
    if (!(delta0_ > 0.0) || !(delta0_ < k0_) || !std::isfinite(k0_)) {
      throw DomainError("StarlikeDomain: require 0 < delta0 < k0 < inf");
    }
    if (!(m_ >= 0.0) || !std::isfinite(m_)) {
      throw DomainError("StarlikeDomain: Lipschitz constant must be >= 0");
    }
  }

  std::size_t spatial_dim() const { return n_; }
  const Interval& window() const { return window_; }
  double delta0() const { return delta0_; }
  double k0() const { return k0_; }
  double m_const() const { return m_; }
  /// sup of phi, taken as the declared upper bound.
  double phi_sup() const { return k0_; }

  void require_time(double s, const char* who) const {
    if (!window_.contains(s)) {
      throw DomainError(std::string(who) + ": time outside the window");
    }
  }

  double radial(double s, std::span<const double> omega) const {
    return radial_(s, omega);
  }
  const RadialFn& radial_fn() const { return radial_; }

  bool contains(double s, std::span<const double> x) const {
    require_time(s, "contains");
    if (x.size() != n_) throw DomainError("contains: dimension mismatch");
    const double r = euclidean_norm(x);
    if (r == 0.0) return true;
    std::vector<double> omega(x.begin(), x.end());
    for (double& v : omega) v /= r;
    return r < radial_(s, omega);
  }

  /// (s, phi(s, omega) omega).
  ParabolicPoint boundary_point(double s, std::span<const double> omega) const {
    require_time(s, "boundary_point");
    if (omega.size() != n_) throw DomainError("boundary_point: dimension mismatch");
    require_unit(omega, "boundary_point");
    const double r = radial_(s, omega);
    std::vector<double> x(omega.begin(), omega.end());
    for (double& v : x) v *= r;
    return ParabolicPoint(s, std::move(x));
  }

 private:
  RadialFn radial_;
  std::size_t n_;
  Interval window_;
  double delta0_;
  double k0_;
  double m_;
};

/// A fixed-time cross-section: an elliptic star-like Lipschitz domain.
struct SliceDomain {
  std::function<double(std::span<const double>)> radial;
  std::size_t spatial_dim = 0;
  double lipschitz_bound = 0.0;
};

inline SliceDomain time_slice(const StarlikeDomain& d, double s) {
  d.require_time(s, "time_slice");
  return SliceDomain{
      [fn = d.radial_fn(), s](std::span<const double> w) { return fn(s, w); },
      d.spatial_dim(), d.m_const()};
}

/// max |phi(w1) - phi(w2)| / |w1 - w2| over random and nearby sphere pairs.
inline double estimate_slice_lipschitz(const SliceDomain& slice,
                                       std::size_t points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  std::vector<double> prev;
  for (std::size_t i = 0; i < points; ++i) {
    const auto w = random_unit_vector(slice.spatial_dim, rng);
    const double fw = slice.radial(w);
    auto consider = [&](const std::vector<double>& v) {
      const double den = euclidean_distance(w, v);
      if (den > 0.0) best = std::max(best, std::abs(fw - slice.radial(v)) / den);
    };
    if (!prev.empty()) consider(prev);
    for (int k = 1; k <= 20; ++k) {
      auto v = random_unit_vector(slice.spatial_dim, rng);
      const double h = std::ldexp(1.0, -k);
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = w[j] + h * v[j];
      const double len = euclidean_norm(v);
      for (double& c : v) c /= len;
      consider(v);
    }
    prev = w;
  }
  return best;
}

/// |w1 - w2|^2 - (|r1 w1 - r2 w2|^2 - |r1 - r2|^2) / (r1 r2); zero in exact
/// arithmetic for unit w1, w2 and positive radii.
inline double sphere_chord_identity(std::span<const double> omega1,
                                    std::span<const double> omega2, double r1,
                                    double r2) {
  if (omega1.size() != omega2.size()) {
    throw DomainError("sphere_chord_identity: dimension mismatch");
  }
  if (!(r1 > 0.0) || !(r2 > 0.0)) {
    throw DomainError("sphere_chord_identity: radii must be positive");
  }
  double chord2 = 0.0;
  double scaled2 = 0.0;
  for (std::size_t i = 0; i < omega1.size(); ++i) {
    const double d = omega1[i] - omega2[i];
    const double e = r1 * omega1[i] - r2 * omega2[i];
    chord2 += d * d;
    scaled2 += e * e;
  }
  const double dr = r1 - r2;
  return chord2 - (scaled2 - dr * dr) / (r1 * r2);
}

/// Spatial rotation R (row-major, n x n) plus a time translation. Chart
/// coordinates of (s, x) are (s - time_shift, R x).
struct SpatialFrame {
  std::size_t n = 0;
  std::vector<double> rotation;
  double time_shift = 0.0;

  double at(std::size_t i, std::size_t j) const { return rotation[i * n + j]; }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) y[i] += at(i, j) * x[j];
    }
    return y;
  }

  std::vector<double> apply_transpose(std::span<const double> y) const {
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) x[j] += at(i, j) * y[i];
    }
    return x;
  }

  /// max_ij |(R^T R - I)_ij|
  double orthogonality_defect() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += at(k, i) * at(k, j);
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    }
    return worst;
  }

  double determinant() const {
    std::vector<double> a = rotation;
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < n; ++r) {
        if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
      }
      if (a[piv * n + c] == 0.0) return 0.0;
      if (piv != c) {
        for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
        det = -det;
      }
      det *= a[c * n + c];
      for (std::size_t r = c + 1; r < n; ++r) {
        const double f = a[r * n + c] / a[c * n + c];
        for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      }
    }
    return det;
  }
};

/// Rotation R with R omega0 = e_n: the Householder reflection along
/// omega0 - e_n followed by a sign flip of the first coordinate, so det R = +1.
inline SpatialFrame frame_to_pole(std::span<const double> omega0,
                                  double time_shift = 0.0) {
  const std::size_t n = omega0.size();
  if (n < 2) throw DomainError("frame_to_pole: dimension must be >= 2");
  require_unit(omega0, "frame_to_pole");
  SpatialFrame fr{n, std::vector<double>(n * n, 0.0), time_shift};
  std::vector<double> v(omega0.begin(), omega0.end());
  v[n - 1] -= 1.0;
  const double vv = squared_norm(v);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (i == j ? 1.0 : 0.0) - (vv > 0.0 ? 2.0 * v[i] * v[j] / vv : 0.0);
      fr.rotation[i * n + j] = h;
    }
  }
  if (vv > 0.0) {
    for (std::size_t j = 0; j < n; ++j) fr.rotation[j] = -fr.rotation[j];
  }
  return fr;
}

/// Constants of the local chart function. Two spatial contraction factors are
/// kept side by side: the chord bound 2/lambda for the sphere projection
/// between arbitrary points, and the derivative bound 4 eta / lambda^2 for
/// vertical moves.
struct ChartConstants {
  double lambda = 0.0;
  double eta = 0.0;
  double phi_sup = 0.0;
  double m_const = 0.0;
  double chord_factor = 0.0;                 ///< 2 / lambda
  double projection_derivative_bound = 0.0;  ///< 4 eta / lambda^2
  double time_coefficient = 0.0;             ///< 2 sup(phi) M
  double space_coefficient = 0.0;            ///< 4 sup(phi) M / lambda + 2 r_max
  double lip_Q = 0.0;                        ///< max of the two coefficients
  double nondegeneracy_K = 0.0;              ///< lambda - 2 sup(phi) M (4 eta / lambda^2)
};

inline ChartConstants chart_constants(const StarlikeDomain& d, double lambda,
                                      double eta) {
  ChartConstants c;
  c.lambda = lambda;
  c.eta = eta;
  c.phi_sup = d.phi_sup();
  c.m_const = d.m_const();
  c.chord_factor = 2.0 / lambda;
  c.projection_derivative_bound = 4.0 * eta / (lambda * lambda);
  const double r_max = std::hypot(eta, lambda + eta);
  c.time_coefficient = 2.0 * c.phi_sup * c.m_const;
  c.space_coefficient = 2.0 * c.phi_sup * c.m_const * c.chord_factor + 2.0 * r_max;
  c.lip_Q = std::max(c.time_coefficient, c.space_coefficient);
  c.nondegeneracy_K =
      lambda - 2.0 * c.phi_sup * c.m_const * c.projection_derivative_bound;
  return c;
}

/// f(t, x', x_n) = phi^2(t + tau, R^T y / |y|) - |y|^2 with y = (x', x_n).
struct ChartFunction {
  ImplicitScalarFn f;
  NondegenerateFn fn;
  ChartConstants constants;
};

inline ChartFunction chart_function(const StarlikeDomain& d,
                                    const SpatialFrame& frame, double eta) {
  const std::size_t n = d.spatial_dim();
  if (frame.n != n) throw DomainError("chart_function: frame dimension mismatch");
  std::vector<double> pole(n, 0.0);
  pole[n - 1] = 1.0;
  const double lambda = d.radial(frame.time_shift, frame.apply_transpose(pole));
  if (!(eta > 0.0) || eta > 0.5 * lambda) {
    throw DomainError("chart_function: require 0 < eta <= lambda / 2");
  }
  auto constants = chart_constants(d, lambda, eta);

  ImplicitScalarFn f = [radial = d.radial_fn(), frame](
                           double t, std::span<const double> xp, double xn) {
    std::vector<double> y(xp.begin(), xp.end());
    y.push_back(xn);
    const double r2 = squared_norm(y);
    const double r = std::sqrt(r2);
    for (double& c : y) c /= r;
    const double phi = radial(t + frame.time_shift, frame.apply_transpose(y));
    return phi * phi - r2;
  };

  const double half_x = eta / std::sqrt(static_cast<double>(n - 1));
  std::vector<Interval> space(n - 1, Interval{-half_x, half_x});
  space.push_back({lambda - eta, lambda + eta});
  SpaceTimeBox box({-eta * eta, eta * eta}, std::move(space));
  Lip12Fn base{[f](double t, std::span<const double> x) {
                 return std::vector<double>{
                     f(t, x.first(x.size() - 1), x.back())};
               },
               std::move(box), 1, constants.lip_Q};
  NondegenerateFn fn{std::move(base), 1, constants.nondegeneracy_K};
  return ChartFunction{std::move(f), std::move(fn), constants};
}

/// eta = min(lambda/2, lambda^3 / (16 sup(phi) M), sqrt(time margin)).
inline double chart_radius(const StarlikeDomain& d, double s0, double lambda) {
  const double margin = std::min(s0 - d.window().lo, d.window().hi - s0);
  if (!(margin > 0.0)) {
    throw DomainError("extract_chart: base time has no margin inside the window");
  }
  double eta = 0.5 * lambda;
  if (d.m_const() > 0.0) {
    eta = std::min(eta, lambda * lambda * lambda /
                            (16.0 * d.phi_sup() * d.m_const()));
  }
  return std::min(eta, std::sqrt(margin));
}

struct ChartVerification {
  std::size_t graph_samples = 0;
  std::size_t boundary_samples = 0;
  double max_graph_residual = 0.0;     ///< |r - phi(s, sigma)| on graph points
  double max_boundary_residual = 0.0;  ///< |x_n - psi(t, x')| on boundary points in C
  double max_f_residual = 0.0;         ///< |f(t, x', psi)| on graph points

  double max_residual() const {
    return std::max(max_graph_residual, max_boundary_residual);
  }
};

/// A local graph representation of the boundary: in the frame's coordinates,
/// C = V x I and C cap boundary = {(t, x', psi(t, x')) : (t, x') in V}.
struct BoundaryChart {
  SpatialFrame frame;
  double lambda = 0.0;
  double eta = 0.0;
  ImplicitGraph psi;
  ChartConstants chart;
  ChartVerification verification;

  const IftConstants& constants() const { return psi.constants(); }
  const SpaceTimeEllipsoid& base() const { return psi.neighborhood(); }
  Interval vertical() const { return {lambda - eta, lambda + eta}; }

  /// (s, x) -> (t, y) in chart coordinates.
  std::pair<double, std::vector<double>> to_chart(
      double s, std::span<const double> x) const {
    return {s - frame.time_shift, frame.apply(x)};
  }

  ParabolicPoint from_chart(double t, std::span<const double> y) const {
    return ParabolicPoint(t + frame.time_shift, frame.apply_transpose(y));
  }

  /// Inside the open cylinder shrunk by `shrink` about its center.
  bool covers(double s, std::span<const double> x, double shrink = 1.0) const {
    auto [t, y] = to_chart(s, x);
    const std::span<const double> ys(y);
    if (std::abs(y.back() - lambda) >= shrink * eta) return false;
    return base().contains(t, ys.first(ys.size() - 1), shrink);
  }

  /// Boundary point on the graph over (t, x').
  ParabolicPoint graph_point(double t, std::span<const double> xp) const {
    std::vector<double> y(xp.begin(), xp.end());
    y.push_back(psi(t, xp));
    return from_chart(t, y);
  }
};

struct ChartOptions {
  std::size_t samples = 1000;  ///< per inclusion direction
  double tolerance = 1e-8;
  std::uint64_t seed = 42;
};

namespace detail {

/// Uniform point in the solid ellipsoid.
inline std::pair<double, std::vector<double>> sample_ellipsoid(
    const SpaceTimeEllipsoid& v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto u = random_unit_vector(v.center_x.size() + 1, rng);
  const double rad = std::pow(unit(rng), 1.0 / static_cast<double>(u.size()));
  std::vector<double> x(v.center_x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = v.center_x[j] + rad * v.radius_x * u[j + 1];
  }
  return {v.center_t + rad * v.radius_t * u[0], std::move(x)};
}

inline std::vector<double> sample_ball(std::size_t dim, double radius,
                                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto u = random_unit_vector(dim, rng);
  const double rad = radius * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
  for (double& c : u) c *= rad;
  return u;
}

}  // namespace detail

/// Verifies both inclusions of C cap boundary = C cap graph(psi) at sample
/// scale and fills chart.verification. Throws ChartInvalidError on failure.
inline void verify_chart(const StarlikeDomain& d, BoundaryChart& chart,
                         const ChartOptions& opt) {
  const std::size_t n = d.spatial_dim();
  std::mt19937_64 rng(opt.seed);
  ChartVerification ver;
  double worst = -1.0;
  double worst_s = 0.0;
  std::vector<double> worst_x;
  auto note = [&](double res, double s, std::vector<double> x) {
    if (res > worst) {
      worst = res;
      worst_s = s;
      worst_x = std::move(x);
    }
  };
  const auto& f = chart.psi.problem().f;

  // graph -> boundary
  for (std::size_t i = 0; i < opt.samples; ++i) {
    auto [t, xp] = detail::sample_ellipsoid(chart.base(), rng);
    const double psi = chart.psi(t, xp);
    ver.max_f_residual = std::max(ver.max_f_residual, std::abs(f(t, xp, psi)));
    auto p = chart.graph_point(t, xp);
    const double r = euclidean_norm(p.x());
    std::vector<double> sigma(p.x().begin(), p.x().end());
    for (double& c : sigma) c /= r;
    const double res = std::abs(r - d.radial(p.t(), sigma));
    ver.max_graph_residual = std::max(ver.max_graph_residual, res);
    note(res, p.t(), p.spatial());
    ++ver.graph_samples;
  }

  // boundary -> graph
  const auto& v = chart.base();
  const double sigma_radius =
      std::min(1.0, v.radius_x / (chart.lambda - chart.eta));
  std::uniform_real_distribution<double> t_dist(-v.radius_t, v.radius_t);
  const std::size_t max_attempts = 400 * opt.samples + 1000;
  std::size_t attempts = 0;
  while (ver.boundary_samples < opt.samples && attempts < max_attempts) {
    ++attempts;
    const double t = t_dist(rng);
    auto sigma = detail::sample_ball(n - 1, sigma_radius, rng);
    const double s2 = squared_norm(sigma);
    if (s2 >= 1.0) continue;
    sigma.push_back(std::sqrt(1.0 - s2));
    const double s = t + chart.frame.time_shift;
    const auto bp = d.boundary_point(s, chart.frame.apply_transpose(sigma));
    if (!chart.covers(s, bp.x())) continue;
    auto [tc, y] = chart.to_chart(s, bp.x());
    const std::span<const double> ys(y);
    const double res = std::abs(y.back() - chart.psi(tc, ys.first(n - 1)));
    ver.max_boundary_residual = std::max(ver.max_boundary_residual, res);
    note(res, s, bp.spatial());
    ++ver.boundary_samples;
  }
  chart.verification = ver;
  if (ver.boundary_samples < opt.samples) {
    throw ChartInvalidError("chart verification: could not sample enough "
                            "boundary points inside the cylinder",
                            worst, worst_s, worst_x);
  }
  if (ver.max_residual() > opt.tolerance) {
    throw ChartInvalidError("chart verification failed: residual " +
                                std::to_string(ver.max_residual()) +
                                " exceeds tolerance",
                            worst, worst_s, worst_x);
  }
}

/// Local Lip(1,1/2) graph chart of the boundary around (s0, phi(s0, omega0)
/// omega0), with both set inclusions verified.
inline BoundaryChart extract_chart(const StarlikeDomain& d, double s0,
                                   std::span<const double> omega0,
                                   const ChartOptions& opt = {}) {
  const std::size_t n = d.spatial_dim();
  d.require_time(s0, "extract_chart");
  if (omega0.size() != n) throw DomainError("extract_chart: dimension mismatch");
  auto frame = frame_to_pole(omega0, s0);
  std::vector<double> pole(n, 0.0);
  pole[n - 1] = 1.0;
  const double lambda = d.radial(s0, frame.apply_transpose(pole));
  const double eta = chart_radius(d, s0, lambda);
  auto cf = chart_function(d, frame, eta);

  const double half_x = eta;
  SpaceTimeBox box({-eta * eta, eta * eta},
                   std::vector<Interval>(n - 1, Interval{-half_x, half_x}));
  IftProblem problem{cf.f,
                     std::move(box),
                     {lambda - eta, lambda + eta},
                     0.0,
                     std::vector<double>(n - 1, 0.0),
                     lambda,
                     cf.constants.lip_Q,
                     cf.constants.nondegeneracy_K,
                     1e-12,
                     std::make_pair(eta * eta, eta),
                     opt.seed};
  BoundaryChart chart{std::move(frame), lambda, eta, solve_graph(problem),
                      cf.constants, {}};
  verify_chart(d, chart, opt);
  return chart;
}

struct BoundarySample {
  double s = 0.0;
  std::vector<double> omega;
  double r = 0.0;
  std::vector<double> x;
};

/// `count` boundary points: s stratified over `span` (one jittered point per
/// stratum), omega uniform on the sphere.
inline std::vector<BoundarySample> sample_boundary(const StarlikeDomain& d,
                                                   std::size_t count,
                                                   std::uint64_t seed,
                                                   Interval span) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<BoundarySample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = (static_cast<double>(i) + unit(rng)) / static_cast<double>(count);
    const double s = std::clamp(span.lo + u * span.width(), span.lo, span.hi);
    auto omega = random_unit_vector(d.spatial_dim(), rng);
    auto p = d.boundary_point(s, omega);
    out.push_back({s, std::move(omega), euclidean_norm(p.x()), p.spatial()});
  }
  return out;
}

inline std::vector<BoundarySample> sample_boundary(const StarlikeDomain& d,
                                                   std::size_t count,
                                                   std::uint64_t seed) {
  return sample_boundary(d, count, seed, d.window());
}

}  // namespace parabolic
