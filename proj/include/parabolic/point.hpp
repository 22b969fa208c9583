#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parabolic/errors.hpp"

namespace parabolic {

inline double squared_norm(std::span<const double> v) {
  return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

inline double euclidean_norm(std::span<const double> v) {
  return std::sqrt(squared_norm(v));
}

inline double euclidean_distance(std::span<const double> a,
                                 std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

/// A point (t, x) of space-time: scalar time and an n-dimensional spatial
/// vector, n >= 1. Coordinates are finite.
class ParabolicPoint {
 public:
  ParabolicPoint(double t, std::vector<double> x) : t_(t), x_(std::move(x)) {
    if (x_.empty()) {
      throw DomainError("ParabolicPoint: spatial dimension must be >= 1");
    }
    if (!std::isfinite(t_)) {
      throw DomainError("ParabolicPoint: non-finite time coordinate");
    }
    for (double v : x_) {
      if (!std::isfinite(v)) {
        throw DomainError("ParabolicPoint: non-finite spatial coordinate");
      }
    }
  }

  static ParabolicPoint origin(std::size_t n) {
    return ParabolicPoint(0.0, std::vector<double>(n, 0.0));
  }

  double t() const { return t_; }
  std::span<const double> x() const { return x_; }
  const std::vector<double>& spatial() const { return x_; }
  std::size_t dim() const { return x_.size(); }

  bool is_origin() const {
    if (t_ != 0.0) return false;
    for (double v : x_) {
      if (v != 0.0) return false;
    }
    return true;
  }

  /// Euclidean norm of (t, x) viewed as a vector of R^{n+1}.
  double euclidean() const { return std::sqrt(t_ * t_ + squared_norm(x_)); }

  friend ParabolicPoint operator-(const ParabolicPoint& a,
                                  const ParabolicPoint& b) {
    require_same_dim(a, b);
    std::vector<double> d(a.x_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.x_[i] - b.x_[i];
    return ParabolicPoint(a.t_ - b.t_, std::move(d));
  }

  friend ParabolicPoint operator+(const ParabolicPoint& a,
                                  const ParabolicPoint& b) {
    require_same_dim(a, b);
    std::vector<double> d(a.x_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.x_[i] + b.x_[i];
    return ParabolicPoint(a.t_ + b.t_, std::move(d));
  }

  friend bool operator==(const ParabolicPoint& a,
                         const ParabolicPoint& b) = default;

  static void require_same_dim(const ParabolicPoint& a,
                               const ParabolicPoint& b) {
    if (a.dim() != b.dim()) {
      throw DomainError("spatial dimension mismatch: " +
                        std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()));
    }
  }

 private:
  double t_;
  std::vector<double> x_;
};

}  // namespace parabolic
