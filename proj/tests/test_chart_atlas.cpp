#include <cmath>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "parabolic/chart_atlas.hpp"

using namespace parabolic;

namespace {

StarlikeDomain unit_ball(Interval window) {
  return StarlikeDomain([](double, std::span<const double>) { return 1.0; }, 2, window, 0.5, 2.0, 0.0);
}

StarlikeDomain limacon() {
  return StarlikeDomain([](double, std::span<const double> w) { return oracle::limacon_radius(w); }, 2,
                        {0.0, 1.0}, 0.5, 3.5, 1.0);
}

}  // namespace

TEST(SphereArea, KnownValues) {
  EXPECT_NEAR(sphere_area(2), 2 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_area(4), 2 * std::numbers::pi * std::numbers::pi, 1e-13);
}

TEST(AtlasSpan, TrimsBothEnds) {
  const auto span = atlas_span(unit_ball({0.0, 1.0}), 0.1);
  EXPECT_DOUBLE_EQ(span.lo, 0.1);
  EXPECT_DOUBLE_EQ(span.hi, 0.9);
  EXPECT_EQ(atlas_sample_count(unit_ball({0.0, 1.0}), 100.0, {0.0, 1.0}),
            static_cast<std::size_t>(std::ceil(200 * std::numbers::pi)));
}

TEST(BuildAtlas, RejectsBadOptions) {
  AtlasOptions o;
  o.seed_density = 0.0;
  EXPECT_THROW(build_atlas(unit_ball({0, 1}), o), DomainError);
  o.seed_density = 10.0;
  o.window_trim = 0.5;
  EXPECT_THROW(build_atlas(unit_ball({0, 1}), o), DomainError);
}

TEST(BuildAtlas, ShortUnitBallCylinder) {
  AtlasOptions o;
  o.seed_density = 2000.0;
  const auto atlas = build_atlas(unit_ball({0.0, 0.1}), o);
  EXPECT_LE(atlas.charts.size(), atlas.coverage_samples.size());
  for (const auto& s : atlas.coverage_samples) {
    const auto& c = atlas.charts.at(s.chart);
    ASSERT_TRUE(c.covers(s.point.s, s.point.x, o.build_shrink));
  }
  for (const auto& c : atlas.charts) {
    EXPECT_EQ(c.lambda, 1.0);
    EXPECT_LE(c.verification.max_residual(), 1e-8);
  }
  const auto rep = verify_atlas(atlas, 43);
  EXPECT_EQ(rep.samples, atlas_sample_count(atlas.domain, 8000.0, atlas.sampled_span));
  EXPECT_EQ(rep.covered, rep.samples);
  EXPECT_EQ(rep.fraction, 1.0);
  EXPECT_LE(rep.worst_residual, 1e-8);
  EXPECT_LE(rep.worst_f_residual, 1e-10);
  EXPECT_LE(rep.worst_lip_ratio, 1.0);
  EXPECT_TRUE(rep.passed);
}

TEST(BuildAtlas, LimaconCovers) {
  AtlasOptions o;
  o.seed_density = 1000.0;
  const auto atlas = build_atlas(limacon(), o);
  const auto rep = verify_atlas(atlas, 7);
  EXPECT_TRUE(rep.passed) << rep.covered << "/" << rep.samples << " residual " << rep.worst_residual;
  // residuals against the closed-form radius
  for (const auto& c : atlas.charts) {
    const auto p = c.graph_point(0.0, std::vector<double>{0.5 * c.base().radius_x});
    const double r = euclidean_norm(p.x());
    std::vector<double> w = p.spatial();
    for (double& v : w) v /= r;
    EXPECT_LE(std::abs(r - oracle::limacon_radius(w)), 1e-8);
  }
}

TEST(BuildAtlas, Deterministic) {
  AtlasOptions o;
  o.seed_density = 50.0;
  o.chart.samples = 200;
  const auto a = build_atlas(limacon(), o);
  const auto b = build_atlas(limacon(), o);
  ASSERT_EQ(a.charts.size(), b.charts.size());
  for (std::size_t i = 0; i < a.charts.size(); ++i) {
    EXPECT_EQ(a.charts[i].frame.rotation, b.charts[i].frame.rotation);
    EXPECT_EQ(a.charts[i].eta, b.charts[i].eta);
  }
}

TEST(VerifyAtlas, EmptyAtlasCoversNothing) {
  AtlasOptions o;
  o.seed_density = 20.0;
  auto atlas = build_atlas(unit_ball({0.0, 1.0}), o);
  atlas.charts.clear();
  const auto rep = verify_atlas(atlas, 1);
  EXPECT_GT(rep.samples, 0u);
  EXPECT_EQ(rep.covered, 0u);
  EXPECT_EQ(rep.fraction, 0.0);
  EXPECT_FALSE(rep.passed);
}

TEST(VerifyAtlas, DroppingChartsLowersCoverage) {
  AtlasOptions o;
  o.seed_density = 60.0;
  o.chart.samples = 200;
  auto atlas = build_atlas(limacon(), o);
  ASSERT_GT(atlas.charts.size(), 4u);
  const double full = verify_atlas(atlas, 3, {.lip_budget = 0}).fraction;
  atlas.charts.erase(atlas.charts.begin() + static_cast<long>(atlas.charts.size() / 2), atlas.charts.end());
  const double half = verify_atlas(atlas, 3, {.lip_budget = 0}).fraction;
  EXPECT_LT(half, full);
  EXPECT_GT(half, 0.0);
}

TEST(VerifyAtlas, CoverageImprovesWithDensity) {
  double last = -1.0;
  for (double density : {5.0, 40.0, 200.0}) {
    AtlasOptions o;
    o.seed_density = density;
    o.chart.samples = 200;
    const auto rep = verify_atlas(build_atlas(limacon(), o), 11, {.lip_budget = 0});
    EXPECT_GE(rep.fraction + 0.02, last) << density;
    last = rep.fraction;
  }
  EXPECT_GT(last, 0.99);
}
