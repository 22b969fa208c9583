#pragma once

// Domain configuration files:
//   {"n": 2, "window": [0, 1], "delta0": 0.5, "k0": 4.0, "M": 1.5,
//    "phi": "2 + 0.25*sin(s)*w1"}
// plus optional "name" and "seed".

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "parabolic/errors.hpp"
#include "parabolic/radial_dsl.hpp"

namespace parabolic {

struct DomainConfig {
  std::string name;
  dsl::RadialSpec spec;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline double config_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace detail

inline DomainConfig parse_domain_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const char* known[] = {"name", "n", "window", "delta0", "k0", "M", "phi", "seed"};
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "'");
  }

  if (!j.contains("n") || !j.at("n").is_number_integer()) {
    throw ConfigError("'n' must be an integer");
  }
  const auto n = j.at("n").get<long long>();
  if (n < 2 || n > 9) throw ConfigError("'n' must be between 2 and 9");

  if (!j.contains("window") || !j.at("window").is_array() || j.at("window").size() != 2 ||
      !j.at("window")[0].is_number() || !j.at("window")[1].is_number()) {
    throw ConfigError("'window' must be [T0, T1]");
  }
  const Interval window{j.at("window")[0].get<double>(), j.at("window")[1].get<double>()};

  if (!j.contains("phi") || !j.at("phi").is_string()) {
    throw ConfigError("'phi' must be an expression string");
  }

  DomainConfig cfg;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("'name' must be a string");
    cfg.name = j.at("name").get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      throw ConfigError("'seed' must be a non-negative integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.spec = dsl::make_spec(j.at("phi").get<std::string>(),
                            static_cast<std::size_t>(n), window,
                            detail::config_number(j, "delta0"),
                            detail::config_number(j, "k0"),
                            detail::config_number(j, "M"));
  return cfg;
}

inline DomainConfig load_domain_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_domain_config(buf.str());
}

}  // namespace parabolic
