#pragma once

// JSON manifests/reports, boundary CSV export, atomic file output.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "parabolic/chart_atlas.hpp"
#include "parabolic/config.hpp"
#include "parabolic/errors.hpp"
#include "parabolic/starlike_domain.hpp"

namespace parabolic {

using nlohmann::json;

inline json to_json_array(std::span<const double> v) {
  return json(std::vector<double>(v.begin(), v.end()));
}

inline json chart_manifest(const BoundaryChart& c) {
  const std::size_t n = c.frame.n;
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    rows.push_back(to_json_array(std::span<const double>(c.frame.rotation).subspan(i * n, n)));
  }
  const auto base_dir = std::span<const double>(c.frame.rotation).subspan((n - 1) * n, n);
  const auto& k = c.constants();
  const auto& cc = c.chart;
  const auto& v = c.base();
  const auto& ver = c.verification;
  return json{
      {"frame",
       {{"rotation", rows},
        {"time_shift", c.frame.time_shift},
        {"base_omega", to_json_array(base_dir)}}},
      {"lambda", c.lambda},
      {"eta", c.eta},
      {"psi_at_base", c.psi(0.0, std::vector<double>(n - 1, 0.0))},
      {"neighborhood",
       {{"radius_t", v.radius_t}, {"radius_x", v.radius_x}}},
      {"constants",
       {{"M", k.M},
        {"K", k.K},
        {"epsilon", k.epsilon},
        {"p", k.p},
        {"q", k.q},
        {"m_prime", k.m_prime},
        {"phi_sup", cc.phi_sup},
        {"phi_lip", cc.m_const},
        {"chord_factor", cc.chord_factor},
        {"projection_derivative_bound", cc.projection_derivative_bound},
        {"time_coefficient", cc.time_coefficient},
        {"space_coefficient", cc.space_coefficient}}},
      {"verification",
       {{"samples", ver.graph_samples + ver.boundary_samples},
        {"graph_samples", ver.graph_samples},
        {"boundary_samples", ver.boundary_samples},
        {"max_residual", ver.max_residual()},
        {"max_graph_residual", ver.max_graph_residual},
        {"max_boundary_residual", ver.max_boundary_residual},
        {"max_f_residual", ver.max_f_residual}}}};
}

inline json domain_json(const DomainConfig& cfg) {
  return json{{"name", cfg.name},
              {"phi", cfg.spec.source},
              {"delta0", cfg.spec.delta0},
              {"k0", cfg.spec.k0},
              {"M", cfg.spec.M}};
}

inline json atlas_report_json(const DomainConfig& cfg, const Atlas& atlas,
                              const AtlasReport& rep) {
  json charts = json::array();
  for (const auto& c : atlas.charts) charts.push_back(chart_manifest(c));
  return json{{"domain", domain_json(cfg)},
              {"n", cfg.spec.n},
              {"window", {cfg.spec.window.lo, cfg.spec.window.hi}},
              {"sampled_span", {atlas.sampled_span.lo, atlas.sampled_span.hi}},
              {"seed", atlas.options.seed},
              {"seed_samples", atlas.coverage_samples.size()},
              {"charts", charts},
              {"coverage",
               {{"density", rep.density},
                {"seed", rep.seed},
                {"samples", rep.samples},
                {"covered", rep.covered},
                {"fraction", rep.fraction},
                {"worst_residual", rep.worst_residual},
                {"worst_f_residual", rep.worst_f_residual},
                {"worst_lip_ratio", rep.worst_lip_ratio}}},
              {"passed", rep.passed}};
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string boundary_csv(std::span<const BoundarySample> rows, std::size_t n) {
  std::string out = "s";
  for (std::size_t i = 1; i <= n; ++i) out += ",omega_" + std::to_string(i);
  out += ",r";
  for (std::size_t i = 1; i <= n; ++i) out += ",x_" + std::to_string(i);
  out += "\n";
  for (const auto& b : rows) {
    out += format_double(b.s);
    for (double w : b.omega) out += "," + format_double(w);
    out += "," + format_double(b.r);
    for (double x : b.x) out += "," + format_double(x);
    out += "\n";
  }
  return out;
}

/// Boundary points of a chart, one per graph sample over V.
inline std::vector<BoundarySample> chart_boundary_samples(const BoundaryChart& c,
                                                          std::size_t count,
                                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<BoundarySample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto [t, xp] = detail::sample_ellipsoid(c.base(), rng);
    const auto p = c.graph_point(t, xp);
    const double r = euclidean_norm(p.x());
    std::vector<double> omega(p.x().begin(), p.x().end());
    for (double& w : omega) w /= r;
    out.push_back({p.t(), std::move(omega), r, p.spatial()});
  }
  return out;
}

/// Writes `content` to a temporary sibling and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

}  // namespace parabolic
