#pragma once

// Run configuration for the experiment runner.
//
// Format: a JSON document, versioned by "schema_version" (currently 1):
//
//   {
//     "schema_version": 1,
//     "scheme": 1,                      // 1 Verlet, 2 midpoint, 3 symmetrized
//     "h": 1e-3, "steps": 100000,
//     "mass_spring": {"m": 5, "k": 5, "lambda": 0.2},
//     "gas": {"c": 1.5, "N0": 1, "R": 8.314462618, "T0": 300, "S0": 0, "V0": 2.494e-2},
//     "init": {"x0": 0.3, "x1": 0.3, "S0": 0, "v0": 0},
//     "external_force": {"type": "none"} | {"type": "constant", "value": 0.1},
//     "seed": 12345,
//     "output": "trajectory.csv"        // "-" for stdout
//   }
//
// Every key except schema_version is optional and falls back to the case1
// preset. "gas.U0" may be given; it must then equal c N0 R T0.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "thermovi/errors.hpp"
#include "thermovi/models.hpp"
#include "thermovi/scheme.hpp"

namespace thermovi {

inline constexpr int kSchemaVersion = 1;

struct InitSpec {
  double x0 = 0.0;
  double x1 = 0.0;
  double S0 = 0.0;
  double v0 = 0.0;  // continuous initial velocity used by the exact reference
};

struct ExternalForceSpec {
  enum class Kind { None, Constant } kind = Kind::None;
  double value = 0.0;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  SchemeKind scheme = SchemeKind::Verlet1;
  double h = 1e-3;
  long steps = 100000;
  MassSpringParams mass_spring;
  IdealGasParams gas;
  InitSpec init;
  ExternalForceSpec external_force;
  std::uint64_t seed = 12345;
  std::string output = "trajectory.csv";
};

inline int scheme_number(SchemeKind k) {
  switch (k) {
    case SchemeKind::Verlet1: return 1;
    case SchemeKind::Midpoint2: return 2;
    case SchemeKind::Symmetrized3: return 3;
  }
  return 0;
}

inline SchemeKind scheme_from_number(long n) {
  switch (n) {
    case 1: return SchemeKind::Verlet1;
    case 2: return SchemeKind::Midpoint2;
    case 3: return SchemeKind::Symmetrized3;
    default: throw ConfigError("scheme must be 1, 2 or 3 (got " + std::to_string(n) + ")");
  }
}

/// The two parameter sets of the published experiments (lambda defaults to 0.2).
inline RunConfig preset(const std::string& name) {
  RunConfig cfg;
  if (name == "case1") {
    cfg.mass_spring = {5.0, 5.0, 0.2};
    cfg.gas = IdealGasParams::from_temperature(1.5, 1.0, kGasConstant, 0.0, 300.0, 2.494e-2);
    cfg.init = {0.3, 0.3, 0.0, 0.0};
  } else if (name == "case2") {
    cfg.mass_spring = {10.0, 20.0, 0.2};
    cfg.gas = IdealGasParams::from_temperature(1.5, 2.0, kGasConstant, 0.0, 300.0, 9.9775e-2);
    cfg.init = {0.1, 0.1, 0.0, 0.0};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected case1 or case2)");
  }
  cfg.h = 1e-3;
  cfg.steps = 100000;
  return cfg;
}

inline void validate(const RunConfig& cfg) {
  if (cfg.schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));
  if (!(cfg.h > 0) || !std::isfinite(cfg.h)) throw ConfigError("h must be positive");
  if (cfg.steps < 1) throw ConfigError("steps must be >= 1");
  try {
    validate(cfg.mass_spring);
    validate(cfg.gas);
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
  if (!std::isfinite(cfg.init.x0) || !std::isfinite(cfg.init.x1) || !std::isfinite(cfg.init.S0) ||
      !std::isfinite(cfg.init.v0))
    throw ConfigError("init values must be finite");
  if (cfg.external_force.kind == ExternalForceSpec::Kind::Constant && !std::isfinite(cfg.external_force.value))
    throw ConfigError("external_force.value must be finite");
}

inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = cfg.schema_version;
  j["scheme"] = scheme_number(cfg.scheme);
  j["h"] = cfg.h;
  j["steps"] = cfg.steps;
  j["mass_spring"] = {{"m", cfg.mass_spring.m}, {"k", cfg.mass_spring.k}, {"lambda", cfg.mass_spring.lambda}};
  j["gas"] = {{"U0", cfg.gas.U0}, {"c", cfg.gas.c},   {"N0", cfg.gas.N0}, {"R", cfg.gas.R},
              {"T0", cfg.gas.T0}, {"S0", cfg.gas.S0}, {"V0", cfg.gas.V0}};
  j["init"] = {{"x0", cfg.init.x0}, {"x1", cfg.init.x1}, {"S0", cfg.init.S0}, {"v0", cfg.init.v0}};
  if (cfg.external_force.kind == ExternalForceSpec::Kind::Constant)
    j["external_force"] = {{"type", "constant"}, {"value", cfg.external_force.value}};
  else
    j["external_force"] = {{"type", "none"}};
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  return j;
}

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Parses a configuration document; missing keys take case1 values.
inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  if (!j.contains("schema_version")) throw ConfigError("configuration is missing schema_version");
  RunConfig cfg = preset("case1");
  try {
    cfg.schema_version = j.at("schema_version").get<int>();
    if (j.contains("scheme")) cfg.scheme = scheme_from_number(j.at("scheme").get<long>());
    detail::read_opt(j, "h", cfg.h);
    detail::read_opt(j, "steps", cfg.steps);
    if (j.contains("mass_spring")) {
      const auto& ms = j.at("mass_spring");
      detail::read_opt(ms, "m", cfg.mass_spring.m);
      detail::read_opt(ms, "k", cfg.mass_spring.k);
      detail::read_opt(ms, "lambda", cfg.mass_spring.lambda);
    }
    if (j.contains("gas")) {
      const auto& g = j.at("gas");
      detail::read_opt(g, "c", cfg.gas.c);
      detail::read_opt(g, "N0", cfg.gas.N0);
      detail::read_opt(g, "R", cfg.gas.R);
      detail::read_opt(g, "T0", cfg.gas.T0);
      detail::read_opt(g, "S0", cfg.gas.S0);
      detail::read_opt(g, "V0", cfg.gas.V0);
      cfg.gas.U0 = cfg.gas.c * cfg.gas.N0 * cfg.gas.R * cfg.gas.T0;
      detail::read_opt(g, "U0", cfg.gas.U0);
    }
    if (j.contains("init")) {
      const auto& in = j.at("init");
      detail::read_opt(in, "x0", cfg.init.x0);
      detail::read_opt(in, "x1", cfg.init.x1);
      detail::read_opt(in, "S0", cfg.init.S0);
      detail::read_opt(in, "v0", cfg.init.v0);
    }
    if (j.contains("external_force")) {
      const auto& ef = j.at("external_force");
      const std::string type = ef.value("type", "none");
      if (type == "none") {
        cfg.external_force = {};
      } else if (type == "constant") {
        cfg.external_force = {ExternalForceSpec::Kind::Constant, ef.at("value").get<double>()};
      } else {
        throw ConfigError("external_force.type must be 'none' or 'constant'");
      }
    }
    detail::read_opt(j, "seed", cfg.seed);
    detail::read_opt(j, "output", cfg.output);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return parse_config(j);
}

inline ForceField external_force_field(const ExternalForceSpec& spec) {
  if (spec.kind == ExternalForceSpec::Kind::Constant) return ForceField::constant(Vector::Constant(1, spec.value));
  return ForceField::zero(1);
}

inline SystemModel build_model(const RunConfig& cfg) {
  return mass_spring_gas_model(cfg.mass_spring, cfg.gas, external_force_field(cfg.external_force));
}

}  // namespace thermovi
