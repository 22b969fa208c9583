#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "parabolic/errors.hpp"
#include "parabolic/lip_analysis.hpp"
#include "parabolic/metric.hpp"
#include "parabolic/sampling.hpp"

namespace parabolic {

/// f(t, x, y) with a scalar implicit variable y.
using ImplicitScalarFn =
    std::function<double(double t, std::span<const double> x, double y)>;

struct IftProblem {
  ImplicitScalarFn f;
  SpaceTimeBox box;  ///< the (t, x) region
  Interval y_range;  ///< the implicit interval I
  double root_t = 0.0;
  std::vector<double> root_x;
  double root_y = 0.0;
  double declared_M = 0.0;
  double declared_K = 0.0;
  double root_tol = 1e-12;
  /// Initial (time, space) semi-axes of the neighborhood. When absent the
  /// largest Euclidean ball around the root inside `box` is used.
  std::optional<std::pair<double, double>> initial_radii;
  std::uint64_t probe_seed = 42;

  void validate() const {
    if (!f) throw DomainError("IftProblem: missing function");
    if (root_x.size() != box.spatial_dim()) {
      throw DomainError("IftProblem: root dimension does not match box");
    }
    if (!(declared_M > 0.0) || !(declared_K > 0.0)) {
      throw DomainError("IftProblem: declared M and K must be positive");
    }
    if (!(y_range.lo < y_range.hi) || !y_range.contains(root_y)) {
      throw DomainError("IftProblem: root_y outside the implicit interval");
    }
    std::vector<double> root{root_t};
    root.insert(root.end(), root_x.begin(), root_x.end());
    if (!box.contains(root)) {
      throw DomainError("IftProblem: root outside the (t, x) box");
    }
    const double r = f(root_t, root_x, root_y);
    if (!(std::abs(r) <= root_tol)) {
      throw DomainError("IftProblem: |f(a, b)| = " + std::to_string(r) +
                        " exceeds root tolerance");
    }
  }
};

/// The constants of the constructive argument, with C0 = 1/2 and C1 = 1.
struct IftConstants {
  double M = 0.0;
  double K = 0.0;
  double epsilon = 0.0;
  double p = 0.0;        ///< C1 (1 + eps M)
  double q = 0.0;        ///< min{C0 (1 - M eps), C0 K eps}
  double m_prime = 0.0;  ///< C1^2 / (C0 q), Lip(1,1/2) bound for the graph
};

/// eps = 1/(M + K) equalizes both terms of q, which maximizes q.
inline IftConstants choose_constants(double M, double K) {
  if (!(M > 0.0) || !(K > 0.0)) {
    throw DomainError("choose_constants: M and K must be positive");
  }
  IftConstants c;
  c.M = M;
  c.K = K;
  c.epsilon = 1.0 / (M + K);
  c.p = kC1 * (1.0 + c.epsilon * M);
  c.q = std::min(kC0 * (1.0 - M * c.epsilon), kC0 * K * c.epsilon);
  c.m_prime = kC1 * kC1 / (kC0 * c.q);
  return c;
}

/// g(t, x, y) = (t, x, eps f(t, x, y)), acting on points whose last spatial
/// coordinate is y.
inline ParabolicMap build_g(const IftProblem& problem,
                            const IftConstants& constants) {
  return [f = problem.f, eps = constants.epsilon](const ParabolicPoint& p) {
    const auto xs = p.x();
    if (xs.size() < 2) throw DomainError("build_g: expected (t, x, y)");
    std::vector<double> out(xs.begin(), xs.end());
    out.back() = eps * f(p.t(), xs.first(xs.size() - 1), xs.back());
    return ParabolicPoint(p.t(), std::move(out));
  };
}

namespace detail {

struct BisectionResult {
  double root = 0.0;
  double width = 0.0;
  int iterations = 0;
};

inline constexpr int kMaxBisection = 200;

/// Bracketed bisection of h on [lo, hi]; requires a strict sign change.
template <class H>
std::optional<BisectionResult> bisect(const H& h, double lo, double hi,
                                      double width_tol) {
  double flo = h(lo);
  const double fhi = h(hi);
  if (flo == 0.0) return BisectionResult{lo, 0.0, 0};
  if (fhi == 0.0) return BisectionResult{hi, 0.0, 0};
  if (std::signbit(flo) == std::signbit(fhi)) return std::nullopt;
  int it = 0;
  for (; it < kMaxBisection && hi - lo > width_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = h(mid);
    if (fm == 0.0) return BisectionResult{mid, 0.0, it + 1};
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return BisectionResult{0.5 * (lo + hi), hi - lo, it};
}

struct BitsHash {
  std::size_t operator()(const std::vector<std::uint64_t>& k) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    for (auto v : k) {
      h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Write-once memo keyed by the exact bits of the query.
class MemoTable {
 public:
  std::optional<double> find(const std::vector<std::uint64_t>& key) const {
    std::shared_lock lock(mu_);
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  void insert(std::vector<std::uint64_t> key, double value) {
    std::unique_lock lock(mu_);
    map_.emplace(std::move(key), value);
  }
  std::size_t size() const {
    std::shared_lock lock(mu_);
    return map_.size();
  }

 private:
  mutable std::shared_mutex mu_;
  std::unordered_map<std::vector<std::uint64_t>, double, BitsHash> map_;
};

}  // namespace detail

/// Axis-aligned ellipsoid in (t, x): ((t - ct)/r_t)^2 + |x - cx|^2 / r_x^2 < 1.
struct SpaceTimeEllipsoid {
  double center_t = 0.0;
  std::vector<double> center_x;
  double radius_t = 0.0;
  double radius_x = 0.0;

  /// Normalized radial coordinate; < 1 inside.
  double level(double t, std::span<const double> x) const {
    const double dt = (t - center_t) / radius_t;
    double dx2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - center_x[i];
      dx2 += d * d;
    }
    return std::sqrt(dt * dt + dx2 / (radius_x * radius_x));
  }

  bool contains(double t, std::span<const double> x,
                double shrink = 1.0) const {
    return level(t, x) < shrink;
  }

  /// Largest axis-aligned box inside, for sampling.
  SpaceTimeBox inscribed_box() const {
    const double k = 1.0 / std::sqrt(static_cast<double>(center_x.size() + 1));
    std::vector<Interval> space;
    for (double c : center_x) {
      space.push_back({c - k * radius_x, c + k * radius_x});
    }
    return SpaceTimeBox({center_t - k * radius_t, center_t + k * radius_t},
                        std::move(space));
  }
};

/// phi on the neighborhood V, evaluated lazily by bisection and memoized.
class ImplicitGraph {
 public:
  ImplicitGraph(IftProblem problem, IftConstants constants,
                SpaceTimeEllipsoid neighborhood)
      : problem_(std::make_shared<const IftProblem>(std::move(problem))),
        constants_(constants),
        neighborhood_(std::move(neighborhood)),
        memo_(std::make_shared<detail::MemoTable>()) {}

  const SpaceTimeEllipsoid& neighborhood() const { return neighborhood_; }
  const IftConstants& constants() const { return constants_; }
  const IftProblem& problem() const { return *problem_; }

  double width_tol() const {
    return 1e-14 * (1.0 + problem_->y_range.width());
  }
  /// Bound on |f(t, x, phi(t, x))| at every query.
  double residual_tol() const {
    return 1e-12 + problem_->declared_M * width_tol();
  }

  bool in_domain(double t, std::span<const double> x) const {
    return neighborhood_.level(t, x) <= 1.0 + 1e-12;
  }

  double operator()(double t, std::span<const double> x) const {
    if (x.size() != neighborhood_.center_x.size()) {
      throw DomainError("ImplicitGraph: dimension mismatch");
    }
    if (!in_domain(t, x)) {
      throw DomainError("ImplicitGraph: query outside the neighborhood");
    }
    std::vector<std::uint64_t> key;
    key.reserve(x.size() + 1);
    key.push_back(std::bit_cast<std::uint64_t>(t));
    for (double v : x) key.push_back(std::bit_cast<std::uint64_t>(v));
    if (auto hit = memo_->find(key)) return *hit;
    const double y = solve_at(t, x);
    memo_->insert(std::move(key), y);
    return y;
  }

  /// Uncached root of f(t, x, .) on I.
  double solve_at(double t, std::span<const double> x) const {
    const auto& pr = *problem_;
    auto h = [&](double y) { return pr.f(t, x, y); };
    auto r = detail::bisect(h, pr.y_range.lo, pr.y_range.hi, width_tol());
    if (!r) {
      throw NondegeneracyError(
          "ImplicitGraph: f(t, x, .) has no sign change on I at t=" +
          std::to_string(t));
    }
    return r->root;
  }

  /// phi as a Lip12Fn over the inscribed box of V, declared with m_prime.
  Lip12Fn as_lip12() const {
    ImplicitGraph self = *this;
    return Lip12Fn{[self](double t, std::span<const double> x) {
                     return std::vector<double>{self(t, x)};
                   },
                   neighborhood_.inscribed_box(), 1, constants_.m_prime};
  }

  std::size_t memo_size() const { return memo_->size(); }

 private:
  std::shared_ptr<const IftProblem> problem_;
  IftConstants constants_;
  SpaceTimeEllipsoid neighborhood_;
  std::shared_ptr<detail::MemoTable> memo_;
};

namespace detail {

inline bool brackets(const IftProblem& pr, double t,
                     std::span<const double> x) {
  const double lo = pr.f(t, x, pr.y_range.lo);
  const double hi = pr.f(t, x, pr.y_range.hi);
  return std::isfinite(lo) && std::isfinite(hi) && lo * hi < 0.0;
}

/// Axis points and random points on the ellipsoid surface.
inline bool probes_bracket(const IftProblem& pr, const SpaceTimeEllipsoid& v,
                           std::mt19937_64& rng) {
  const std::size_t m = v.center_x.size();
  std::vector<double> x = v.center_x;
  for (double sgn : {-1.0, 1.0}) {
    if (!brackets(pr, v.center_t + sgn * v.radius_t, x)) return false;
    for (std::size_t i = 0; i < m; ++i) {
      x = v.center_x;
      x[i] += sgn * v.radius_x;
      if (!brackets(pr, v.center_t, x)) return false;
    }
  }
  for (int k = 0; k < 64; ++k) {
    const auto u = random_unit_vector(m + 1, rng);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = v.center_x[i] + v.radius_x * u[i + 1];
    }
    if (!brackets(pr, v.center_t + v.radius_t * u[0], x)) return false;
  }
  return true;
}

}  // namespace detail

inline constexpr double kMinNeighborhoodRadius = 1e-9;

/// Builds phi near the root: f(t, x, phi(t, x)) = 0 on V, with V shrunk by
/// halving until every boundary probe brackets a root in I.
inline ImplicitGraph solve_graph(const IftProblem& problem) {
  problem.validate();
  const auto constants = choose_constants(problem.declared_M,
                                          problem.declared_K);
  if (!detail::brackets(problem, problem.root_t, problem.root_x)) {
    throw NondegeneracyError(
        "solve_graph: f(a, .) does not change sign on the implicit interval");
  }

  double fit_t = std::min(problem.root_t - problem.box.time().lo,
                          problem.box.time().hi - problem.root_t);
  double fit_x = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < problem.root_x.size(); ++i) {
    const auto& iv = problem.box.space()[i];
    fit_x = std::min({fit_x, problem.root_x[i] - iv.lo,
                      iv.hi - problem.root_x[i]});
  }
  double r_t = 0.0;
  double r_x = 0.0;
  if (problem.initial_radii) {
    r_t = std::min(problem.initial_radii->first, fit_t);
    r_x = std::min(problem.initial_radii->second, fit_x);
  } else {
    r_t = r_x = std::min(fit_t, fit_x);
  }
  if (!(r_t > 0.0) || !(r_x > 0.0)) {
    throw NeighborhoodError("solve_graph: root lies on the box boundary");
  }

  SpaceTimeEllipsoid v{problem.root_t, problem.root_x, r_t, r_x};
  std::mt19937_64 rng(problem.probe_seed);
  while (!detail::probes_bracket(problem, v, rng)) {
    v.radius_t *= 0.5;
    v.radius_x *= 0.5;
    if (std::max(v.radius_t, v.radius_x) < kMinNeighborhoodRadius) {
      throw NeighborhoodError(
          "solve_graph: neighborhood radius underflow while shrinking");
    }
  }
  return ImplicitGraph(problem, constants, std::move(v));
}

/// Sample-scale check that the zero set of f in V x I is the graph of phi.
struct GraphCheck {
  std::size_t samples = 0;
  double max_residual = 0.0;  ///< max |f(t, x, phi(t, x))|
  /// max of |y - phi| - (|f(t,x,y)| + |f(t,x,phi)|) / K over random y in I;
  /// <= 0 means every near-zero of f sits on the graph.
  double max_uniqueness_excess = -std::numeric_limits<double>::infinity();
};

inline GraphCheck check_graph(const ImplicitGraph& graph, std::size_t points,
                              std::size_t ys_per_point, std::uint64_t seed) {
  const auto& pr = graph.problem();
  const auto& v = graph.neighborhood();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> y_dist(pr.y_range.lo, pr.y_range.hi);
  GraphCheck out;
  std::vector<double> x(v.center_x.size());
  for (std::size_t i = 0; i < points; ++i) {
    const auto u = random_unit_vector(x.size() + 1, rng);
    const double rad = std::pow(unit(rng), 1.0 / static_cast<double>(u.size()));
    const double t = v.center_t + rad * v.radius_t * u[0];
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] = v.center_x[j] + rad * v.radius_x * u[j + 1];
    }
    const double phi = graph(t, x);
    const double res = std::abs(pr.f(t, x, phi));
    out.max_residual = std::max(out.max_residual, res);
    for (std::size_t k = 0; k < ys_per_point; ++k) {
      const double y = y_dist(rng);
      const double fy = std::abs(pr.f(t, x, y));
      out.max_uniqueness_excess = std::max(
          out.max_uniqueness_excess,
          std::abs(y - phi) - (fy + res) / pr.declared_K);
    }
    ++out.samples;
  }
  return out;
}

/// Inverse of build_g on its image: (t, x, z) -> (t, x, y) with
/// eps f(t, x, y) = z, y in I.
inline ParabolicMap build_g_inverse(const IftProblem& problem,
                                    const IftConstants& constants) {
  return [f = problem.f, eps = constants.epsilon,
          iv = problem.y_range](const ParabolicPoint& p) {
    const auto xs = p.x();
    const auto xpart = xs.first(xs.size() - 1);
    const double z = xs.back();
    auto h = [&](double y) { return eps * f(p.t(), xpart, y) - z; };
    auto r = detail::bisect(h, iv.lo, iv.hi, 1e-15 * (1.0 + iv.width()));
    if (!r) throw DomainError("g inverse: point outside the image of g");
    std::vector<double> out(xs.begin(), xs.end());
    out.back() = r->root;
    return ParabolicPoint(p.t(), std::move(out));
  };
}

}  // namespace parabolic
