#include <atomic>
#include <bit>
#include <cmath>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "parabolic/implicit_solver.hpp"

using namespace parabolic;

namespace {

double heat_like(double t, std::span<const double> x, double y) {
  return 2.0 * y - std::sin(x[0]) - std::sqrt(std::abs(t));
}

IftProblem heat_problem() {
  return IftProblem{.f = heat_like,
                    .box = SpaceTimeBox({-2.0, 2.0}, {{-2.0, 2.0}}),
                    .y_range = {-3.0, 3.0},
                    .root_t = 0.0,
                    .root_x = {0.0},
                    .root_y = 0.0,
                    .declared_M = 2.0,
                    .declared_K = 2.0};
}

}  // namespace

TEST(ChooseConstants, ProofFormulas) {
  const auto a = choose_constants(2.0, 2.0);
  EXPECT_DOUBLE_EQ(a.epsilon, 0.25);
  EXPECT_DOUBLE_EQ(a.q, 0.25);
  EXPECT_DOUBLE_EQ(a.p, 1.5);
  EXPECT_DOUBLE_EQ(a.m_prime, 8.0);
  const auto b = choose_constants(2.0, 1.0);
  EXPECT_DOUBLE_EQ(b.epsilon, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(b.q, 1.0 / 6.0);
  for (double M : {0.1, 1.0, 7.0}) {
    for (double K : {0.01, 1.0, 50.0}) {
      EXPECT_LT(choose_constants(M, K).epsilon, 1.0 / M);
      EXPECT_GT(choose_constants(M, K).q, 0.0);
    }
  }
  EXPECT_THROW(choose_constants(0.0, 1.0), DomainError);
  EXPECT_THROW(choose_constants(1.0, -1.0), DomainError);
}

TEST(BuildG, FixesTheRoot) {
  const auto pr = heat_problem();
  const auto g = build_g(pr, choose_constants(2.0, 2.0));
  EXPECT_EQ(g(ParabolicPoint(0.0, {0.0, 0.0})), ParabolicPoint(0.0, {0.0, 0.0}));
  const auto q = g(ParabolicPoint(1.0, {0.5, 0.7}));
  EXPECT_EQ(q.t(), 1.0);
  EXPECT_EQ(q.x()[0], 0.5);
  EXPECT_DOUBLE_EQ(q.x()[1], 0.25 * heat_like(1.0, std::vector<double>{0.5}, 0.7));
}

TEST(BuildG, SandwichAndInverse) {
  const auto pr = heat_problem();
  const auto k = choose_constants(2.0, 2.0);
  const auto g = build_g(pr, k);
  SpaceTimeBox box({-2.0, 2.0}, {{-2.0, 2.0}, {-3.0, 3.0}});
  const auto cert = check_bilipschitz(g, box, {10000, 7, 20}, DeclaredBiLip{k.q / kC1, k.p / kC0});
  EXPECT_GE(cert.lower, k.q / kC1 - 1e-9);
  EXPECT_LE(cert.upper, k.p / kC0 + 1e-9);
  EXPECT_TRUE(cert.injective_on_samples());
  const auto inv = check_inverse_bounds(g, build_g_inverse(pr, k), box, cert, {2000, 7, 20});
  EXPECT_LE(inv.max_excess, 1e-9);
}

TEST(SolveGraph, ConstantLevel) {
  IftProblem p{.f = [](double, std::span<const double>, double y) { return y - 0.75; },
               .box = SpaceTimeBox({-1.0, 1.0}, {{-1.0, 1.0}, {-1.0, 1.0}}),
               .y_range = {0.0, 2.0},
               .root_x = {0.0, 0.0},
               .root_y = 0.75,
               .declared_M = 1.0,
               .declared_K = 1.0};
  const auto g = solve_graph(p);
  for (double t : {-0.5, 0.0, 0.3}) {
    EXPECT_NEAR(g(t, std::vector<double>{0.1, -0.2}), 0.75, 1e-13);
  }
  EXPECT_DOUBLE_EQ(g.neighborhood().radius_t, 1.0);
  const auto est = estimate_lip12(g.as_lip12(), {200, 1, 20});
  EXPECT_LE(est.value, 1e-12);
}

TEST(SolveGraph, HeatLikeMatchesClosedForm) {
  const auto g = solve_graph(heat_problem());
  EXPECT_DOUBLE_EQ(g.neighborhood().radius_t, 2.0);
  EXPECT_DOUBLE_EQ(g.neighborhood().radius_x, 2.0);
  EXPECT_NEAR(g(1.0, std::vector<double>{0.0}), 0.5, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    const std::vector<double> x{u(rng)};
    const double phi = g(t, x);
    ASSERT_NEAR(phi, oracle::ift_graph(t, x[0]), 1e-10);
    ASSERT_LE(std::abs(heat_like(t, x, phi)), g.residual_tol());
  }
}

TEST(SolveGraph, LipschitzBoundAndUniqueness) {
  const auto g = solve_graph(heat_problem());
  const auto est = estimate_lip12(g.as_lip12(), {3000, 11, 20});
  EXPECT_LE(est.value, g.constants().m_prime);
  EXPECT_LE(est.value, 0.5 + 1e-9);
  EXPECT_GT(est.value, 0.45);
  const auto chk = check_graph(g, 1000, 100, 5);
  EXPECT_EQ(chk.samples, 1000u);
  EXPECT_LE(chk.max_residual, 1e-12);
  EXPECT_LE(chk.max_uniqueness_excess, 1e-12);
}

TEST(SolveGraph, GivenConstantIsBelowTrueJointConstant) {
  SpaceTimeBox box({-2.0, 2.0}, {{-2.0, 2.0}, {-3.0, 3.0}});
  Lip12Fn f{[](double t, std::span<const double> x) {
              return std::vector<double>{heat_like(t, x.first(1), x[1])};
            },
            box, 1, 2.0};
  const auto est = estimate_lip12(f, {5000, 2, 20});
  EXPECT_GT(est.value, 2.0);
  EXPECT_LE(est.value, std::sqrt(5.0) + 1.0);
}

TEST(SolveGraph, Errors) {
  auto p = heat_problem();
  p.f = [](double, std::span<const double>, double y) { return y * y + 1.0; };
  p.root_tol = 10.0;
  EXPECT_THROW(solve_graph(p), NondegeneracyError);

  auto q = heat_problem();
  q.f = [](double, std::span<const double> x, double y) {
    return y - (x[0] > 0 ? 5.0 : x[0] < 0 ? -5.0 : 0.0);
  };
  EXPECT_THROW(solve_graph(q), NeighborhoodError);

  auto r = heat_problem();
  r.root_y = 1.0;
  EXPECT_THROW(solve_graph(r), DomainError);

  auto s = heat_problem();
  s.declared_K = 0.0;
  EXPECT_THROW(solve_graph(s), DomainError);

  const auto g = solve_graph(heat_problem());
  EXPECT_THROW(g(2.5, std::vector<double>{0.0}), DomainError);
  EXPECT_THROW(g(0.0, std::vector<double>{0.0, 0.0}), DomainError);
}

TEST(SolveGraph, ShrinksUntilProbesBracket) {
  auto p = heat_problem();
  p.y_range = {-0.3, 0.3};
  const auto g = solve_graph(p);
  EXPECT_LT(g.neighborhood().radius_x, 2.0);
  EXPECT_GT(g.neighborhood().radius_x, 0.1);
  EXPECT_NEAR(g(0.0, std::vector<double>{0.1}), oracle::ift_graph(0.0, 0.1), 1e-12);
}

TEST(ImplicitGraph, MemoIsWriteOnceAndThreadSafe) {
  const auto g = solve_graph(heat_problem());
  std::vector<std::pair<double, double>> queries;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) queries.emplace_back(u(rng), u(rng));

  std::vector<std::vector<double>> results(4, std::vector<double>(queries.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = 0; i < queries.size(); ++i) {
        results[w][i] = g(queries[i].first, std::vector<double>{queries[i].second});
      }
    });
  }
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const double uncached = g.solve_at(queries[i].first, std::vector<double>{queries[i].second});
    for (int w = 0; w < 4; ++w) {
      EXPECT_EQ(std::bit_cast<std::uint64_t>(results[w][i]), std::bit_cast<std::uint64_t>(uncached));
    }
  }
  EXPECT_EQ(g.memo_size(), queries.size());
}

TEST(Bisection, StopsOnWidth) {
  auto r = detail::bisect([](double y) { return y - 0.1; }, 0.0, 1.0, 1e-14 * 2.0);
  ASSERT_TRUE(r);
  EXPECT_NEAR(r->root, 0.1, 1e-14);
  EXPECT_LE(r->width, 2e-14);
  EXPECT_LE(r->iterations, 200);
  EXPECT_FALSE(detail::bisect([](double y) { return y + 5.0; }, 0.0, 1.0, 1e-14));
}
