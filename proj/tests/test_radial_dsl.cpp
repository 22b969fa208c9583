#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dsl_golden.hpp"
#include "oracles.hpp"
#include "parabolic/config.hpp"
#include "parabolic/radial_dsl.hpp"

using namespace parabolic;
using namespace parabolic::dsl;

TEST(Parse, GoldenTrees) {
  ASSERT_GE(golden::accepted().size(), 15u);
  for (const auto& a : golden::accepted()) EXPECT_EQ(golden::check_accept(a), "");
}

TEST(Parse, GoldenDiagnostics) {
  ASSERT_GE(golden::rejected().size(), 5u);
  for (const auto& r : golden::rejected()) EXPECT_EQ(golden::check_reject(r), "");
}

TEST(Parse, DiagnosticText) {
  try {
    parse("2 +");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.expected(), (std::vector<std::string>{"number", "identifier", "'('"}));
    EXPECT_STREQ(e.what(),
                 "1:4: unexpected token: unexpected end of input (expected number, identifier, '(')");
  }
  EXPECT_THROW(parse("2^65"), ParseError);
  EXPECT_NO_THROW(parse("2^64"));
  EXPECT_THROW(parse("s", 0), std::invalid_argument);
}

TEST(Parse, RoundTripShippedExpressions) {
  std::vector<std::string> sources;
  for (const char* name : {"unit_ball", "wobbly", "limacon", "pulsing_ball_3d"}) {
    const auto cfg = load_domain_config(std::string(PARABOLIC_SOURCE_DIR) + "/configs/" + name + ".json");
    sources.push_back(cfg.spec.source);
  }
  for (const auto& a : golden::accepted()) sources.emplace_back(a.source);
  for (const auto& src : sources) {
    const auto e = parse(src);
    const auto printed = to_source(*e);
    const auto again = parse(printed);
    EXPECT_TRUE(same_structure(*e, *again)) << src << " -> " << printed;
    EXPECT_EQ(to_source(*again), printed);
  }
}

TEST(Parse, NumbersPrintShortest) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(1e-300), "1e-300");
  EXPECT_EQ(to_source(*parse("0.25*w1")), "0.25 * w1");
  EXPECT_EQ(to_source(*parse("1 - (2 - 3)")), "1 - (2 - 3)");
}

TEST(Parse, TotalOnRandomInput) {
  const std::string alphabet = "0123456789.+-*/^(),sw cosinqrtabeg\n\t$e";
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> len(0, 24);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::size_t ok = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string src(len(rng), ' ');
    for (char& c : src) c = alphabet[pick(rng)];
    try {
      const auto e = parse(src);
      ++ok;
      EXPECT_TRUE(same_structure(*e, *parse(to_source(*e)))) << src;
    } catch (const ParseError& err) {
      EXPECT_GE(err.line(), 1);
      EXPECT_GE(err.column(), 1);
    }
  }
  EXPECT_GT(ok, 0u);
}

TEST(Evaluate, Examples) {
  const std::vector<double> e1{1.0, 0.0};
  EXPECT_EQ(evaluate(*parse("1"), 0.3, e1), 1.0);
  EXPECT_NEAR(evaluate(*parse("2 + cos(w1)"), 0.0, e1), 2.0 + std::cos(1.0), 1e-15);
  EXPECT_NEAR(evaluate(*parse("2 + cos(w1)"), 0.0, e1), 2.5403023059, 1e-10);
  std::mt19937_64 rng(1);
  const auto w = parse("2 + 0.25*sin(s)*w1");
  for (int i = 0; i < 100; ++i) {
    const auto om = random_unit_vector(2, rng);
    EXPECT_EQ(evaluate(*w, 0.0, om), 2.0);
    EXPECT_EQ(evaluate(*w, 0.7, om), oracle::wobbly_radius(0.7, om));
  }
  EXPECT_EQ(evaluate(*parse("2^10 - neg(3)"), 0, e1), 1027.0);
  EXPECT_EQ(evaluate(*parse("abs(w2 - 1) / 4"), 0, e1), 0.25);
  EXPECT_EQ(evaluate(*parse("sqrt(w1 + 3)"), 0, e1), 2.0);
}

TEST(Evaluate, Pure) {
  const auto e = parse("sin(s)^3 + cos(w1*w2) / (1 + w3^2)");
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto om = random_unit_vector(3, rng);
    const double a = evaluate(*e, 0.1 * i, om);
    const double b = evaluate(*e, 0.1 * i, om);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
}

TEST(Evaluate, ErrorsNameTheSubexpression) {
  const std::vector<double> e1{1.0, 0.0};
  try {
    evaluate(*parse("1 + sqrt(s - 2)"), 0.0, e1);
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.subexpression, "sqrt(s - 2)");
  }
  try {
    evaluate(*parse("3 * (1 / w2)"), 0.0, e1);
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.subexpression, "1 / w2");
  }
  EXPECT_THROW(evaluate(*parse("w3"), 0.0, e1), EvalError);
}

TEST(Spec, Invariants) {
  EXPECT_NO_THROW(make_spec("1", 2, {0, 1}, 0.5, 2, 0));
  try {
    make_spec("1", 2, {0, 1}, 2, 2, 0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("invariant violated"), std::string::npos);
  }
  EXPECT_THROW(make_spec("1", 1, {0, 1}, 0.5, 2, 0), ConfigError);
  EXPECT_THROW(make_spec("1", 2, {1, 0}, 0.5, 2, 0), ConfigError);
  EXPECT_THROW(make_spec("1", 2, {0, 1}, 0.5, 2, -1), ConfigError);
  EXPECT_THROW(make_spec("w3", 2, {0, 1}, 0.5, 2, 0), ConfigError);
  EXPECT_THROW(make_spec("2 +", 2, {0, 1}, 0.5, 2, 0), ConfigError);
}

TEST(Validate, Examples) {
  const auto one = validate_spec(make_spec("1", 2, {0, 1}, 0.5, 2, 0));
  EXPECT_TRUE(one.passed());
  EXPECT_GE(one.samples, 10000u);
  EXPECT_EQ(one.min_value, 1.0);
  EXPECT_EQ(one.max_value, 1.0);

  const auto lim = validate_spec(make_spec("2 + cos(w1)", 2, {0, 1}, 0.5, 3.5, 1));
  EXPECT_TRUE(lim.passed());
  EXPECT_GT(lim.min_value, 2.0 + std::cos(1.0) - 1e-12);
  EXPECT_LE(lim.max_value, 3.0);
  EXPECT_LE(lim.lip_estimate, 1.0);
  EXPECT_GT(lim.lip_estimate, 0.3);

  const auto bad = validate_spec(make_spec("0.1*s", 2, {0, 1}, 0.5, 2, 0));
  EXPECT_FALSE(bad.passed());
  EXPECT_EQ(bad.range_violations, bad.samples);
  ASSERT_FALSE(bad.witnesses.empty());
  EXPECT_LE(bad.witnesses.front().s, 0.01);
  EXPECT_LE(bad.witnesses.size(), 5u);
}

TEST(Validate, CatchesLipschitzAndEvaluationFailures) {
  const auto lip = validate_spec(make_spec("2 + 0.25*sin(s)*w1", 2, {-1, 1}, 1.5, 2.5, 0.01));
  EXPECT_FALSE(lip.lip_ok);
  EXPECT_EQ(lip.range_violations, 0u);
  EXPECT_TRUE(validate_spec(make_spec("2 + 0.25*sin(s)*w1", 2, {-1, 1}, 1.5, 2.5, 0.5)).passed());

  const auto ev = validate_spec(make_spec("1 + sqrt(s)", 2, {-1, 1}, 0.5, 3, 10));
  EXPECT_GT(ev.eval_errors, 0u);
  EXPECT_FALSE(ev.passed());
  ASSERT_FALSE(ev.witnesses.empty());
  EXPECT_NE(ev.witnesses.front().message.find("sqrt(s)"), std::string::npos);
}

TEST(Validate, DomainFromSpec) {
  const auto d = make_domain(make_spec("2 + cos(w1)", 2, {0, 1}, 0.5, 3.5, 1));
  EXPECT_NEAR(d.radial(0.5, std::vector<double>{1.0, 0.0}), 2.0 + std::cos(1.0), 1e-15);
  EXPECT_EQ(d.m_const(), 1.0);
}

TEST(Config, ParsesShippedFiles) {
  const auto cfg = load_domain_config(std::string(PARABOLIC_SOURCE_DIR) + "/configs/wobbly.json");
  EXPECT_EQ(cfg.name, "wobbly");
  EXPECT_EQ(cfg.spec.n, 2u);
  EXPECT_EQ(cfg.spec.window.lo, -1.0);
  EXPECT_EQ(cfg.spec.delta0, 1.5);
  EXPECT_EQ(cfg.seed, 42u);
  const auto pulse = load_domain_config(std::string(PARABOLIC_SOURCE_DIR) + "/configs/pulsing_ball_3d.json");
  EXPECT_EQ(pulse.spec.n, 3u);
}

TEST(Config, Rejects) {
  const std::string good = R"({"n":2,"window":[0,1],"delta0":0.5,"k0":2,"M":0,"phi":"1"})";
  EXPECT_NO_THROW(parse_domain_config(good));
  EXPECT_FALSE(parse_domain_config(good).seed.has_value());
  for (const char* bad : {
           R"({"n":2,"window":[0,1],"delta0":0.5,"k0":2,"M":0,"phi":"1","extra":1})",
           R"({"n":2.5,"window":[0,1],"delta0":0.5,"k0":2,"M":0,"phi":"1"})",
           R"({"n":10,"window":[0,1],"delta0":0.5,"k0":2,"M":0,"phi":"1"})",
           R"({"n":2,"window":[0],"delta0":0.5,"k0":2,"M":0,"phi":"1"})",
           R"({"n":2,"window":[0,1],"k0":2,"M":0,"phi":"1"})",
           R"({"n":2,"window":[0,1],"delta0":"a","k0":2,"M":0,"phi":"1"})",
           R"({"n":2,"window":[0,1],"delta0":0.5,"k0":2,"M":0,"phi":1})",
           R"({"n":2,"window":[0,1],"delta0":0.5,"k0":2,"M":0,"phi":"1","seed":-3})",
           R"({"n":2,"window":[0,1],"delta0":3,"k0":2,"M":0,"phi":"1"})",
           R"([1,2])",
           R"({"n":2,)",
       }) {
    EXPECT_THROW(parse_domain_config(bad), ConfigError) << bad;
  }
  EXPECT_THROW(load_domain_config("/nonexistent/x.json"), ConfigError);
}
