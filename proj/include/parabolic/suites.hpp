#pragma once

// Randomized property suites shared by the CLI `verify` command and tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "parabolic/metric.hpp"
#include "parabolic/point.hpp"
#include "parabolic/sampling.hpp"
#include "parabolic/starlike_domain.hpp"

namespace parabolic {

struct MetricSuiteResult {
  std::size_t spatial_dim = 0;
  std::size_t triples = 0;
  /// max of D(p,r) - D(p,q) - D(q,r)
  double max_triangle_excess = -std::numeric_limits<double>::infinity();
  std::size_t symmetry_failures = 0;
  std::size_t identity_failures = 0;
  double tolerance = 1e-12;

  bool passed() const {
    return max_triangle_excess <= tolerance && symmetry_failures == 0 &&
           identity_failures == 0;
  }
};

namespace detail {

/// Coordinates spread over several magnitudes so both the time-dominated and
/// the space-dominated regimes get exercised.
inline ParabolicPoint random_point(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> scale_exp(-3, 3);
  const double st = std::ldexp(1.0, 2 * scale_exp(rng));
  const double sx = std::ldexp(1.0, scale_exp(rng));
  std::vector<double> x(n);
  for (double& c : x) c = sx * u(rng);
  return ParabolicPoint(st * u(rng), std::move(x));
}

}  // namespace detail

inline MetricSuiteResult run_metric_suite(std::size_t n, std::size_t triples,
                                          std::uint64_t seed,
                                          double tolerance = 1e-12) {
  MetricSuiteResult out;
  out.spatial_dim = n;
  out.tolerance = tolerance;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < triples; ++i) {
    const auto p = detail::random_point(n, rng);
    auto q = detail::random_point(n, rng);
    auto r = detail::random_point(n, rng);
    switch (i % 4) {
      case 1: {
        // three points on one spatial segment at a common time: equality case
        const double a = unit(rng);
        r = ParabolicPoint(p.t(), r.spatial());
        std::vector<double> x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = p.x()[j] + a * (r.x()[j] - p.x()[j]);
        q = ParabolicPoint(p.t(), std::move(x));
        break;
      }
      case 2: {
        // a tiny step away from p
        std::vector<double> x(p.x().begin(), p.x().end());
        for (double& c : x) c += 1e-9 * (unit(rng) - 0.5);
        q = ParabolicPoint(p.t() + 1e-12 * (unit(rng) - 0.5), std::move(x));
        break;
      }
      default:
        break;
    }
    const double pq = metric_distance(p, q);
    const double qr = metric_distance(q, r);
    const double pr = metric_distance(p, r);
    out.max_triangle_excess = std::max(out.max_triangle_excess, pr - (pq + qr));
    if (pq != metric_distance(q, p)) ++out.symmetry_failures;
    if (metric_distance(p, p) != 0.0) ++out.identity_failures;
    if ((pq == 0.0) != (p == q)) ++out.identity_failures;
    ++out.triples;
  }
  return out;
}

struct ChordSuiteResult {
  std::size_t spatial_dim = 0;
  std::size_t samples = 0;
  double max_residual = 0.0;
  double tolerance = 1e-12;

  bool passed() const { return max_residual <= tolerance; }
};

/// Residual of the polar chord identity over random directions and radii in
/// [1/2, 4].
inline ChordSuiteResult run_chord_suite(std::size_t n, std::size_t samples,
                                        std::uint64_t seed,
                                        double tolerance = 1e-12) {
  ChordSuiteResult out;
  out.spatial_dim = n;
  out.tolerance = tolerance;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(0.5, 4.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto w1 = random_unit_vector(n, rng);
    const auto w2 = random_unit_vector(n, rng);
    const double r1 = radius(rng);
    const double r2 = radius(rng);
    out.max_residual =
        std::max(out.max_residual, std::abs(sphere_chord_identity(w1, w2, r1, r2)));
    ++out.samples;
  }
  return out;
}

}  // namespace parabolic
