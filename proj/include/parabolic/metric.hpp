#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "parabolic/errors.hpp"
#include "parabolic/point.hpp"

namespace parabolic {

/// Certified comparability constants: c0 (|t|^{1/2} + |x|) <= rho(t, x)
/// <= c1 (|t|^{1/2} + |x|).
///
/// rho >= max(|x|, |t|^{1/2}) >= (|x| + |t|^{1/2}) / 2 and
/// rho <= sqrt(|x|^2 + |t|) <= |x| + |t|^{1/2}.
inline constexpr double kC0 = 0.5;
inline constexpr double kC1 = 1.0;

/// Non-isotropic dilation T_lambda(t, x) = (lambda^2 t, lambda x).
class Dilation {
 public:
  explicit Dilation(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw DomainError("Dilation: lambda must be positive and finite");
    }
  }

  double lambda() const { return lambda_; }

  /// Operator norm of diag(lambda^2, lambda, ..., lambda) on R^{n+1}.
  double operator_norm() const { return std::max(lambda_, lambda_ * lambda_); }

  ParabolicPoint operator()(const ParabolicPoint& p) const {
    std::vector<double> x(p.x().begin(), p.x().end());
    for (double& v : x) v *= lambda_;
    return ParabolicPoint(lambda_ * lambda_ * p.t(), std::move(x));
  }

 private:
  double lambda_;
};

inline ParabolicPoint dilate(const Dilation& d, const ParabolicPoint& p) {
  return d(p);
}

/// F(t, x, rho) = t^2 / rho^4 + |x|^2 / rho^2. Strictly decreasing in rho
/// away from the origin.
inline double eval_F(const ParabolicPoint& p, double rho) {
  if (!(rho > 0.0)) {
    throw DomainError("eval_F: rho must be positive");
  }
  const double r2 = rho * rho;
  return (p.t() * p.t()) / (r2 * r2) + squared_norm(p.x()) / r2;
}

namespace detail {

/// Closed form on coordinates of moderate size.
inline double rho_closed_form(double t, double x2) {
  return std::sqrt(0.5 * (x2 + std::hypot(x2, 2.0 * t)));
}

/// Rescales by a power of two (exact) when |x|^2 or t would leave the
/// comfortable exponent range, using rho(s^2 t, s x) = s rho(t, x).
template <class Coord>
inline double rho_scaled(double t, std::size_t n, Coord coord) {
  double big = std::sqrt(std::abs(t));
  for (std::size_t i = 0; i < n; ++i) big = std::max(big, std::abs(coord(i)));
  if (big == 0.0) return 0.0;
  int e = 0;
  if (big > 0x1p+400 || big < 0x1p-400) e = std::ilogb(big);
  double x2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::ldexp(coord(i), -e);
    x2 += c * c;
  }
  return std::ldexp(rho_closed_form(std::ldexp(t, -2 * e), x2), e);
}

}  // namespace detail

/// Parabolic quasi-norm: the unique rho > 0 with F(t, x, rho) = 1, and 0 at
/// the origin. With u = rho^2 the defining equation is u^2 - |x|^2 u - t^2 = 0.
inline double parabolic_norm(double t, std::span<const double> x) {
  if (!std::isfinite(t)) throw DomainError("parabolic_norm: non-finite time");
  for (double c : x) {
    if (!std::isfinite(c)) throw DomainError("parabolic_norm: non-finite x");
  }
  return detail::rho_scaled(t, x.size(), [&](std::size_t i) { return x[i]; });
}

inline double parabolic_norm(const ParabolicPoint& p) {
  return parabolic_norm(p.t(), p.x());
}

/// D((t, x), (s, y)) = rho(t - s, x - y).
inline double metric_distance(const ParabolicPoint& p,
                              const ParabolicPoint& q) {
  ParabolicPoint::require_same_dim(p, q);
  const auto px = p.x();
  const auto qx = q.x();
  return detail::rho_scaled(p.t() - q.t(), p.dim(),
                            [&](std::size_t i) { return px[i] - qx[i]; });
}

/// |t|^{1/2} + |x|, the additive gauge that rho is comparable to.
inline double additive_gauge(double t, std::span<const double> x) {
  return std::sqrt(std::abs(t)) + euclidean_norm(x);
}

inline double comparability_ratio(const ParabolicPoint& p) {
  const double g = additive_gauge(p.t(), p.x());
  if (g == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return parabolic_norm(p) / g;
}

struct ComparabilityConstants {
  double c0 = kC0;
  double c1 = kC1;
  /// Tightest constants observed on the checked samples.
  double empirical_min = std::numeric_limits<double>::infinity();
  double empirical_max = 0.0;
  std::size_t checked = 0;
};

/// Checks the certified pair (1/2, 1) on every non-origin sample. A violation
/// beyond a few ulps means the norm implementation is wrong.
inline ComparabilityConstants comparability_check(
    std::span<const ParabolicPoint> samples) {
  if (samples.empty()) {
    throw DomainError("comparability_check: empty sample list");
  }
  constexpr double slack = 8.0 * std::numeric_limits<double>::epsilon();
  ComparabilityConstants out;
  for (const auto& p : samples) {
    if (p.is_origin()) continue;
    const double ratio = comparability_ratio(p);
    if (ratio < kC0 * (1.0 - slack) || ratio > kC1 * (1.0 + slack)) {
      throw ConsistencyError("comparability violated: ratio " +
                             std::to_string(ratio) + " at t=" +
                             std::to_string(p.t()));
    }
    out.empirical_min = std::min(out.empirical_min, ratio);
    out.empirical_max = std::max(out.empirical_max, ratio);
    ++out.checked;
  }
  return out;
}

}  // namespace parabolic
