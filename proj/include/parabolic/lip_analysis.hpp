#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "parabolic/errors.hpp"
#include "parabolic/metric.hpp"
#include "parabolic/point.hpp"
#include "parabolic/sampling.hpp"

namespace parabolic {

using SpaceTimeEvaluator =
    std::function<std::vector<double>(double t, std::span<const double> x)>;

/// A function on a space-time box, with an optional declared constant M for
/// |f(t,x) - f(s,y)| <= M (|t-s|^{1/2} + |x-y|).
struct Lip12Fn {
  SpaceTimeEvaluator eval;
  SpaceTimeBox box;
  std::size_t output_dim = 1;
  std::optional<double> declared_M;

  std::vector<double> operator()(double t, std::span<const double> x) const {
    auto out = eval(t, x);
    if (out.size() != output_dim) {
      throw DomainError("Lip12Fn: evaluator returned wrong output dimension");
    }
    return out;
  }
};

/// A Lip(1,1/2) function whose spatial input splits as (x, y); the trailing
/// `implicit_dim` coordinates form y. declared_K bounds
/// |f(t,x,y1) - f(t,x,y2)| >= K |y1 - y2| from below.
struct NondegenerateFn {
  Lip12Fn base;
  std::size_t implicit_dim = 1;
  double declared_K = 0.0;
};

/// Witness pair for an extremal ratio, coordinates as (t, x...).
struct PairWitness {
  std::vector<double> a;
  std::vector<double> b;
  double ratio = 0.0;
};

struct LipEstimate {
  double value = 0.0;  ///< empirical M-hat or K-hat
  std::size_t pairs = 0;
  std::size_t skipped_zero = 0;
  /// How far the estimate exceeds (M) or falls short of (K) the declared
  /// constant; <= 0 means no violation. Absent when nothing was declared.
  std::optional<double> max_violation;
  PairWitness witness;
};

namespace detail {

inline double output_distance(const std::vector<double>& a,
                              const std::vector<double>& b) {
  return euclidean_distance(a, b);
}

inline double gauge_distance(std::span<const double> a,
                             std::span<const double> b) {
  double x2 = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    x2 += d * d;
  }
  return std::sqrt(std::abs(a[0] - b[0])) + std::sqrt(x2);
}

inline ParabolicPoint to_point(std::span<const double> c) {
  return ParabolicPoint(c[0], std::vector<double>(c.begin() + 1, c.end()));
}

}  // namespace detail

/// M-hat = max over sampled pairs of |f(p) - f(q)| / (|t-s|^{1/2} + |x-y|).
inline LipEstimate estimate_lip12(const Lip12Fn& f, const SamplerConfig& cfg) {
  LipEstimate out;
  PairSampler sampler(f.box, cfg);
  sampler.for_each([&](std::span<const double> base, const auto& partners) {
    const auto fb = f(base[0], base.subspan(1));
    for (const auto& q : partners) {
      const double den = detail::gauge_distance(base, q);
      if (den == 0.0) {
        ++out.skipped_zero;
        continue;
      }
      const auto fq = f(q[0], std::span<const double>(q).subspan(1));
      const double ratio = detail::output_distance(fb, fq) / den;
      ++out.pairs;
      if (ratio > out.value) {
        out.value = ratio;
        out.witness = {{base.begin(), base.end()}, q, ratio};
      }
    }
  });
  if (f.declared_M) out.max_violation = out.value - *f.declared_M;
  return out;
}

/// K-hat = min over sampled y-pairs sharing (t, x) of
/// |f(t,x,y1) - f(t,x,y2)| / |y1 - y2|.
inline LipEstimate estimate_nondegeneracy(const NondegenerateFn& f,
                                          const SamplerConfig& cfg) {
  const std::size_t coords = f.base.box.coords();
  if (f.implicit_dim == 0 || f.implicit_dim > f.base.box.spatial_dim()) {
    throw DomainError("estimate_nondegeneracy: bad implicit dimension");
  }
  const std::size_t y_begin = coords - f.implicit_dim;
  LipEstimate out;
  out.value = std::numeric_limits<double>::infinity();
  PairSampler sampler(f.base.box, cfg, y_begin);
  sampler.for_each([&](std::span<const double> base, const auto& partners) {
    const auto fb = f.base(base[0], base.subspan(1));
    for (const auto& q : partners) {
      double dy2 = 0.0;
      for (std::size_t i = y_begin; i < coords; ++i) {
        const double d = base[i] - q[i];
        dy2 += d * d;
      }
      if (dy2 == 0.0) {
        ++out.skipped_zero;
        continue;
      }
      const auto fq = f.base(q[0], std::span<const double>(q).subspan(1));
      const double ratio = detail::output_distance(fb, fq) / std::sqrt(dy2);
      ++out.pairs;
      if (ratio < out.value) {
        out.value = ratio;
        out.witness = {{base.begin(), base.end()}, q, ratio};
      }
    }
  });
  if (f.declared_K > 0.0) out.max_violation = f.declared_K - out.value;
  return out;
}

/// A map of space-time into space-time (possibly of another spatial
/// dimension), measured with the parabolic quasi-norm on both sides.
using ParabolicMap = std::function<ParabolicPoint(const ParabolicPoint&)>;

/// Empirical bi-Lipschitz constants in the parabolic quasi-norm:
/// lower <= ||g(a) - g(b)|| / ||a - b|| <= upper on all sampled pairs.
struct BiLipCertificate {
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  std::size_t sample_count = 0;
  std::size_t skipped_zero = 0;
  /// Largest amount by which a declared (lower, upper) pair is broken;
  /// <= 0 when both hold. Absent unless declared bounds were supplied.
  std::optional<double> max_violation;
  /// Distinct inputs with equal outputs were found.
  bool non_injective = false;
  PairWitness lower_witness;
  PairWitness upper_witness;

  bool injective_on_samples() const { return !non_injective && lower > 0.0; }
};

struct DeclaredBiLip {
  double lower;
  double upper;
};

inline BiLipCertificate check_bilipschitz(
    const ParabolicMap& g, const SpaceTimeBox& box, const SamplerConfig& cfg,
    std::optional<DeclaredBiLip> declared = std::nullopt) {
  BiLipCertificate cert;
  PairSampler sampler(box, cfg);
  sampler.for_each([&](std::span<const double> base, const auto& partners) {
    const auto a = detail::to_point(base);
    const auto ga = g(a);
    for (const auto& qc : partners) {
      const auto b = detail::to_point(qc);
      const double den = metric_distance(a, b);
      if (den == 0.0) {
        ++cert.skipped_zero;
        continue;
      }
      const double num = metric_distance(ga, g(b));
      const double ratio = num / den;
      ++cert.sample_count;
      if (num == 0.0) cert.non_injective = true;
      if (ratio < cert.lower) {
        cert.lower = ratio;
        cert.lower_witness = {{base.begin(), base.end()}, qc, ratio};
      }
      if (ratio > cert.upper) {
        cert.upper = ratio;
        cert.upper_witness = {{base.begin(), base.end()}, qc, ratio};
      }
    }
  });
  if (declared) {
    cert.max_violation =
        std::max(declared->lower - cert.lower, cert.upper - declared->upper);
  }
  return cert;
}

struct InverseBoundsCheck {
  std::size_t pairs = 0;
  /// max over image pairs of the relative excess of either reciprocal
  /// bound; <= 0 when upper^-1 |d'| <= |d(g^-1)| <= lower^-1 |d'| holds.
  double max_excess = -std::numeric_limits<double>::infinity();
};

/// Samples image pairs a' = g(a), b' = g(b), maps them back through `g_inv`
/// and checks the reciprocal bounds implied by `cert`.
inline InverseBoundsCheck check_inverse_bounds(const ParabolicMap& g,
                                               const ParabolicMap& g_inv,
                                               const SpaceTimeBox& box,
                                               const BiLipCertificate& cert,
                                               const SamplerConfig& cfg) {
  InverseBoundsCheck out;
  PairSampler sampler(box, cfg);
  sampler.for_each([&](std::span<const double> base, const auto& partners) {
    const auto ga = g(detail::to_point(base));
    const auto ia = g_inv(ga);
    for (const auto& qc : partners) {
      const auto img_b = g(detail::to_point(qc));
      const double img = metric_distance(ga, img_b);
      if (img == 0.0) continue;
      const double pre = metric_distance(ia, g_inv(img_b));
      const double hi = img / cert.lower;
      const double lo = img / cert.upper;
      out.max_excess = std::max(out.max_excess, (pre - hi) / hi);
      out.max_excess = std::max(out.max_excess, (lo - pre) / lo);
      ++out.pairs;
    }
  });
  return out;
}

}  // namespace parabolic
