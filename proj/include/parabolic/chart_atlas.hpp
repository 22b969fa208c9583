#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "parabolic/errors.hpp"
#include "parabolic/lip_analysis.hpp"
#include "parabolic/starlike_domain.hpp"

namespace parabolic {

/// Surface area of S^{n-1}.
inline double sphere_area(std::size_t n) {
  const double h = 0.5 * static_cast<double>(n);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

struct AtlasOptions {
  double seed_density = 1000.0;  ///< samples per unit of (time x sphere area)
  std::uint64_t seed = 42;
  ChartOptions chart;
  /// A new chart claims only samples inside this fraction of its cylinder, so
  /// neighbouring charts overlap and fresh samples between seeds stay covered.
  double build_shrink = 0.5;
  /// Charts need a time margin inside the window; the sampled boundary is the
  /// window with this fraction trimmed from each end.
  double window_trim = 0.1;
};

struct CoverageSample {
  BoundarySample point;
  std::size_t chart = 0;
};

struct Atlas {
  StarlikeDomain domain;
  AtlasOptions options;
  Interval sampled_span;
  std::vector<BoundaryChart> charts;
  std::vector<CoverageSample> coverage_samples;
};

inline Interval atlas_span(const StarlikeDomain& d, double trim) {
  const double mu = trim * d.window().width();
  return {d.window().lo + mu, d.window().hi - mu};
}

inline std::size_t atlas_sample_count(const StarlikeDomain& d, double density,
                                      Interval span) {
  const double area = span.width() * sphere_area(d.spatial_dim());
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(density * area)));
}

/// Greedy cover: walk the stratified seeds in order, extract a chart at each
/// seed not yet covered, and let it claim every sample inside its (shrunk)
/// cylinder.
inline Atlas build_atlas(const StarlikeDomain& d, const AtlasOptions& opt) {
  if (!(opt.seed_density > 0.0)) {
    throw DomainError("build_atlas: density must be positive");
  }
  if (!(opt.window_trim > 0.0) || !(opt.window_trim < 0.5)) {
    throw DomainError("build_atlas: window trim must lie in (0, 1/2)");
  }
  Atlas atlas{d, opt, atlas_span(d, opt.window_trim), {}, {}};
  const auto count = atlas_sample_count(d, opt.seed_density, atlas.sampled_span);
  auto samples = sample_boundary(d, count, opt.seed, atlas.sampled_span);
  std::vector<std::optional<std::size_t>> owner(samples.size());

  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (owner[i]) continue;
    ChartOptions copt = opt.chart;
    copt.seed = opt.chart.seed + i;
    try {
      atlas.charts.push_back(extract_chart(d, samples[i].s, samples[i].omega, copt));
    } catch (const std::exception& e) {
      throw AtlasBuildError(std::string("build_atlas: chart extraction failed: ") +
                                e.what(),
                            samples[i].s, samples[i].omega);
    }
    const std::size_t idx = atlas.charts.size() - 1;
    const auto& chart = atlas.charts.back();
    owner[i] = idx;
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      if (!owner[j] && chart.covers(samples[j].s, samples[j].x, opt.build_shrink)) {
        owner[j] = idx;
      }
    }
  }
  atlas.coverage_samples.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    atlas.coverage_samples.push_back({std::move(samples[i]), *owner[i]});
  }
  return atlas;
}

struct VerifyOptions {
  double density_factor = 4.0;
  double coverage_shrink = 0.99;
  double residual_tolerance = 1e-8;
  double f_tolerance = 1e-10;
  /// Base points per chart for the Lip(1,1/2) estimate of psi; 0 skips it.
  std::size_t lip_budget = 8;
};

struct AtlasReport {
  std::uint64_t seed = 0;
  double density = 0.0;
  std::size_t samples = 0;
  std::size_t covered = 0;
  double fraction = 0.0;
  /// max over fresh covered samples and chart verifications of the
  /// boundary/graph distance
  double worst_residual = 0.0;
  double worst_f_residual = 0.0;  ///< max |f(t, x', psi)| on fresh probes
  /// max over charts of (empirical Lip(1,1/2) of psi) / m_prime
  double worst_lip_ratio = 0.0;
  bool passed = false;
};

inline AtlasReport verify_atlas(const Atlas& atlas, std::uint64_t fresh_seed,
                                const VerifyOptions& opt = {}) {
  const auto& d = atlas.domain;
  AtlasReport rep;
  rep.seed = fresh_seed;
  rep.density = opt.density_factor * atlas.options.seed_density;
  rep.samples = atlas_sample_count(d, rep.density, atlas.sampled_span);
  const auto fresh = sample_boundary(d, rep.samples, fresh_seed, atlas.sampled_span);
  const std::size_t n = d.spatial_dim();
  for (const auto& c : atlas.charts) {
    rep.worst_residual = std::max(rep.worst_residual, c.verification.max_residual());
    rep.worst_f_residual = std::max(rep.worst_f_residual, c.verification.max_f_residual);
  }
  for (const auto& p : fresh) {
    for (const auto& c : atlas.charts) {
      if (!c.covers(p.s, p.x, opt.coverage_shrink)) continue;
      auto [t, y] = c.to_chart(p.s, p.x);
      const std::span<const double> xp = std::span<const double>(y).first(n - 1);
      const double psi = c.psi(t, xp);
      rep.worst_residual = std::max(rep.worst_residual, std::abs(y.back() - psi));
      rep.worst_f_residual = std::max(
          rep.worst_f_residual, std::abs(c.psi.problem().f(t, xp, psi)));
      ++rep.covered;
      break;
    }
  }
  rep.fraction = rep.samples == 0
                     ? 0.0
                     : static_cast<double>(rep.covered) / static_cast<double>(rep.samples);
  if (opt.lip_budget >= 2) {
    for (std::size_t i = 0; i < atlas.charts.size(); ++i) {
      const auto& c = atlas.charts[i];
      const auto est = estimate_lip12(
          c.psi.as_lip12(),
          SamplerConfig{opt.lip_budget, fresh_seed + i, 20});
      rep.worst_lip_ratio = std::max(rep.worst_lip_ratio, est.value / c.constants().m_prime);
    }
  }
  rep.passed = rep.covered == rep.samples && rep.samples > 0 &&
               rep.worst_residual <= opt.residual_tolerance &&
               rep.worst_f_residual <= opt.f_tolerance && rep.worst_lip_ratio <= 1.0;
  return rep;
}

}  // namespace parabolic
