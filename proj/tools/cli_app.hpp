#pragma once

// Command-line front end. run_cli() is the whole program; main() only
// forwards to it so the tests can drive it in-process.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "parabolic/parabolic.hpp"

namespace parabolic::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string config_path;
  std::string out_path;
  std::string export_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  std::optional<double> tol;
  bool reproducible = false;
  std::vector<std::string> numbers;
};

inline double parse_number(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw UsageError("malformed number '" + s + "'");
  }
  return v;
}

inline std::vector<double> parse_numbers(const std::vector<std::string>& raw) {
  std::vector<double> out;
  out.reserve(raw.size());
  for (const auto& s : raw) out.push_back(parse_number(s));
  return out;
}

inline std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void emit(const CliConfig& cfg, const std::string& content, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << content;
  } else {
    write_atomic(cfg.out_path, content);
  }
}

inline DomainConfig load_config(const CliConfig& cfg) {
  try {
    return load_domain_config(cfg.config_path);
  } catch (const ConfigError& e) {
    throw UsageError(cfg.config_path + ": " + e.what());
  }
}

inline std::uint64_t effective_seed(const CliConfig& cfg, const DomainConfig* domain) {
  if (cfg.seed) return *cfg.seed;
  if (domain && domain->seed) return *domain->seed;
  return 42;
}

inline json stamp(json report, const CliConfig& cfg) {
  if (!cfg.reproducible) report["timestamp"] = utc_timestamp();
  return report;
}

// ---------------------------------------------------------------------------

inline int cmd_norm(const CliConfig& cfg, std::ostream& out) {
  const auto v = parse_numbers(cfg.numbers);
  if (v.size() < 2) throw UsageError("norm: expected t and at least one spatial coordinate");
  const ParabolicPoint p(v[0], std::vector<double>(v.begin() + 1, v.end()));
  const double rho = parabolic_norm(p);
  const double ratio = p.is_origin() ? std::nan("") : comparability_ratio(p);
  out << fmt("rho=%#.12g", rho) << " " << fmt("ratio=%.12f", ratio) << "\n";
  return kExitOk;
}

inline int cmd_dist(const CliConfig& cfg, std::ostream& out) {
  const auto v = parse_numbers(cfg.numbers);
  if (v.size() < 4 || v.size() % 2 != 0) {
    throw UsageError("dist: expected t1 x1.. t2 x2.. with equal spatial dimension >= 1");
  }
  const std::size_t half = v.size() / 2;
  const ParabolicPoint p(v[0], std::vector<double>(v.begin() + 1, v.begin() + half));
  const ParabolicPoint q(v[half], std::vector<double>(v.begin() + half + 1, v.end()));
  out << fmt("dist=%#.12g", metric_distance(p, q)) << "\n";
  return kExitOk;
}

inline json validation_json(const dsl::ValidationReport& r) {
  json witnesses = json::array();
  for (const auto& w : r.witnesses) {
    witnesses.push_back({{"s", w.s},
                         {"omega", w.omega},
                         {"value", std::isfinite(w.value) ? json(w.value) : json(nullptr)},
                         {"message", w.message}});
  }
  return json{{"samples", r.samples},
              {"min_value", r.min_value},
              {"max_value", r.max_value},
              {"range_violations", r.range_violations},
              {"eval_errors", r.eval_errors},
              {"lip_estimate", r.lip_estimate},
              {"lip_ok", r.lip_ok},
              {"witnesses", witnesses},
              {"passed", r.passed()}};
}

inline int cmd_verify(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto domain_cfg = load_config(cfg);
  const auto seed = effective_seed(cfg, &domain_cfg);
  const std::size_t budget = cfg.budget.value_or(10000);
  const double tol = cfg.tol.value_or(1e-8);
  bool ok = true;

  json metric = json::array();
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto r = run_metric_suite(n, budget, seed + n);
    metric.push_back({{"n", n},
                      {"triples", r.triples},
                      {"max_triangle_excess", r.max_triangle_excess},
                      {"symmetry_failures", r.symmetry_failures},
                      {"identity_failures", r.identity_failures},
                      {"passed", r.passed()}});
    ok = ok && r.passed();
  }
  json chord = json::array();
  for (std::size_t n = 2; n <= 4; ++n) {
    const auto r = run_chord_suite(n, budget, seed + 10 + n);
    chord.push_back({{"n", n},
                     {"samples", r.samples},
                     {"max_residual", r.max_residual},
                     {"passed", r.passed()}});
    ok = ok && r.passed();
  }

  dsl::ValidationOptions vopt;
  vopt.points = std::max<std::size_t>(budget, 10000);
  vopt.seed = seed + 20;
  const auto validation = dsl::validate_spec(domain_cfg.spec, vopt);
  ok = ok && validation.passed();

  json atlas_json;
  if (!validation.passed()) {
    atlas_json = {{"skipped", "radial function failed validation"}, {"passed", false}};
  } else {
    try {
      AtlasOptions aopt;
      aopt.seed = seed;
      aopt.chart.seed = seed;
      aopt.chart.tolerance = tol;
      const auto atlas = build_atlas(dsl::make_domain(domain_cfg.spec), aopt);
      VerifyOptions vo;
      vo.residual_tolerance = tol;
      const auto rep = verify_atlas(atlas, seed + 1, vo);
      atlas_json = {{"charts", atlas.charts.size()},
                    {"seed_samples", atlas.coverage_samples.size()},
                    {"coverage",
                     {{"density", rep.density},
                      {"samples", rep.samples},
                      {"fraction", rep.fraction},
                      {"worst_residual", rep.worst_residual},
                      {"worst_f_residual", rep.worst_f_residual},
                      {"worst_lip_ratio", rep.worst_lip_ratio}}},
                    {"passed", rep.passed}};
      ok = ok && rep.passed;
    } catch (const AtlasBuildError& e) {
      atlas_json = {{"error", e.what()},
                    {"seed_s", e.seed_s},
                    {"seed_omega", e.seed_omega},
                    {"passed", false}};
      ok = false;
    }
  }

  json report{{"command", "verify"},
              {"config", domain_cfg.name},
              {"domain", domain_json(domain_cfg)},
              {"n", domain_cfg.spec.n},
              {"window", {domain_cfg.spec.window.lo, domain_cfg.spec.window.hi}},
              {"seed", seed},
              {"budget", budget},
              {"tolerance", tol},
              {"metric_suite", metric},
              {"chord_suite", chord},
              {"validation", validation_json(validation)},
              {"atlas", atlas_json},
              {"passed", ok}};
  emit(cfg, stamp(std::move(report), cfg).dump(2) + "\n", out);
  if (!ok) err << "verify: FAILED\n";
  return ok ? kExitOk : kExitFailed;
}

inline int cmd_chart(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto domain_cfg = load_config(cfg);
  const auto seed = effective_seed(cfg, &domain_cfg);
  const auto v = parse_numbers(cfg.numbers);
  const std::size_t n = domain_cfg.spec.n;
  if (v.size() != n + 1) {
    throw UsageError("chart: expected s0 and " + std::to_string(n) + " omega components");
  }
  std::vector<double> omega(v.begin() + 1, v.end());
  const double len = euclidean_norm(omega);
  if (!(std::abs(len - 1.0) <= 1e-6)) {
    throw UsageError("chart: omega has norm " + fmt("%.9g", len) + ", not a unit vector");
  }
  for (double& c : omega) c /= len;

  const auto d = dsl::make_domain(domain_cfg.spec);
  ChartOptions opt;
  opt.seed = seed;
  opt.tolerance = cfg.tol.value_or(1e-8);
  opt.samples = cfg.budget.value_or(1000);
  try {
    const auto chart = extract_chart(d, v[0], omega, opt);
    json manifest = chart_manifest(chart);
    manifest["seed"] = seed;
    emit(cfg, stamp(std::move(manifest), cfg).dump(2) + "\n", out);
    if (!cfg.export_path.empty()) {
      const auto rows = chart_boundary_samples(chart, opt.samples, seed + 1);
      write_atomic(cfg.export_path, boundary_csv(rows, n));
    }
    return kExitOk;
  } catch (const ChartInvalidError& e) {
    err << "chart: " << e.what() << "\n  worst residual " << e.worst_residual
        << " at s=" << e.worst_s << " x=(";
    for (std::size_t i = 0; i < e.worst_x.size(); ++i) err << (i ? ", " : "") << e.worst_x[i];
    err << ")\n";
    json diag{{"error", e.what()},
              {"worst_residual", e.worst_residual},
              {"worst_s", e.worst_s},
              {"worst_x", e.worst_x},
              {"seed", seed}};
    emit(cfg, stamp(std::move(diag), cfg).dump(2) + "\n", out);
    return kExitFailed;
  } catch (const NeighborhoodError& e) {
    err << "chart: " << e.what() << "\n";
    return kExitFailed;
  } catch (const NondegeneracyError& e) {
    err << "chart: " << e.what() << "\n";
    return kExitFailed;
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

inline int cmd_atlas(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto domain_cfg = load_config(cfg);
  const auto seed = effective_seed(cfg, &domain_cfg);
  const auto d = dsl::make_domain(domain_cfg.spec);
  AtlasOptions aopt;
  aopt.seed = seed;
  aopt.chart.seed = seed;
  aopt.chart.tolerance = cfg.tol.value_or(1e-8);
  if (cfg.budget) aopt.seed_density = static_cast<double>(*cfg.budget);
  try {
    const auto atlas = build_atlas(d, aopt);
    VerifyOptions vo;
    vo.residual_tolerance = aopt.chart.tolerance;
    const auto rep = verify_atlas(atlas, seed + 1, vo);
    emit(cfg, stamp(atlas_report_json(domain_cfg, atlas, rep), cfg).dump(2) + "\n", out);
    if (!rep.passed) err << "atlas: verification FAILED\n";
    return rep.passed ? kExitOk : kExitFailed;
  } catch (const AtlasBuildError& e) {
    err << "atlas: " << e.what() << " (seed s=" << e.seed_s << ")\n";
    return kExitFailed;
  }
}

inline int cmd_export_boundary(const CliConfig& cfg, std::ostream& out) {
  const auto domain_cfg = load_config(cfg);
  const auto seed = effective_seed(cfg, &domain_cfg);
  const auto d = dsl::make_domain(domain_cfg.spec);
  const auto rows = sample_boundary(d, cfg.budget.value_or(1000), seed);
  const std::string csv = boundary_csv(rows, domain_cfg.spec.n);
  const std::string& path = cfg.export_path.empty() ? cfg.out_path : cfg.export_path;
  if (path.empty()) {
    out << csv;
  } else {
    write_atomic(path, csv);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parabolic Lip(1,1/2) geometry toolkit"};
  app.require_subcommand(1);
  CliConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "random seed (default: config seed, else 42)");
    sub->add_option("--budget", cfg.budget, "sample budget")->check(CLI::PositiveNumber);
    sub->add_option("--tol", cfg.tol, "residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out_path, "output file (default: stdout)");
    sub->add_flag("--reproducible", cfg.reproducible, "omit the timestamp from reports");
  };

  auto* norm = app.add_subcommand("norm", "parabolic norm of (t, x...)");
  norm->add_option("coords", cfg.numbers, "t x1 [x2 ...]")->required();
  auto* dist = app.add_subcommand("dist", "parabolic distance between two points");
  dist->add_option("coords", cfg.numbers, "t1 x1.. t2 y1..")->required();

  auto* verify = app.add_subcommand("verify", "run all suites and the atlas check on a config");
  verify->add_option("config", cfg.config_path, "domain config (JSON)")->required();
  add_common(verify);

  auto* chart = app.add_subcommand("chart", "extract and verify one boundary chart");
  chart->add_option("config", cfg.config_path, "domain config (JSON)")->required();
  chart->add_option("point", cfg.numbers, "s0 omega1 .. omegan")->required();
  chart->add_option("--export", cfg.export_path, "write boundary CSV of the chart");
  add_common(chart);

  auto* atlas = app.add_subcommand("atlas", "build and verify a chart atlas");
  atlas->add_option("config", cfg.config_path, "domain config (JSON)")->required();
  add_common(atlas);

  auto* exp = app.add_subcommand("export-boundary", "sample the lateral boundary to CSV");
  exp->add_option("config", cfg.config_path, "domain config (JSON)")->required();
  exp->add_option("--export", cfg.export_path, "CSV path (same as --out)");
  add_common(exp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (norm->parsed()) return cmd_norm(cfg, out);
    if (dist->parsed()) return cmd_dist(cfg, out);
    if (verify->parsed()) return cmd_verify(cfg, out, err);
    if (chart->parsed()) return cmd_chart(cfg, out, err);
    if (atlas->parsed()) return cmd_atlas(cfg, out, err);
    return cmd_export_boundary(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  }
}

}  // namespace parabolic::cli
