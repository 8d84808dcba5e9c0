#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "thermovi/thermovi.hpp"

using namespace thermovi;
using nlohmann::json;

TEST(Presets, EncodeThePublishedParameters) {
  const RunConfig c1 = preset("case1");
  EXPECT_EQ(c1.mass_spring.m, 5.0);
  EXPECT_EQ(c1.mass_spring.k, 5.0);
  EXPECT_EQ(c1.gas.N0, 1.0);
  EXPECT_EQ(c1.gas.V0, 2.494e-2);
  EXPECT_EQ(c1.init.x0, 0.3);
  EXPECT_EQ(c1.init.x1, 0.3);
  EXPECT_EQ(c1.gas.T0, 300.0);
  EXPECT_EQ(c1.gas.S0, 0.0);
  EXPECT_EQ(c1.h, 1e-3);
  EXPECT_EQ(c1.steps, 100000);
  const RunConfig c2 = preset("case2");
  EXPECT_EQ(c2.mass_spring.m, 10.0);
  EXPECT_EQ(c2.mass_spring.k, 20.0);
  EXPECT_EQ(c2.gas.N0, 2.0);
  EXPECT_EQ(c2.gas.V0, 9.9775e-2);
  EXPECT_EQ(c2.init.x0, 0.1);
  EXPECT_NEAR(c2.gas.U0, 1.5 * 2.0 * kGasConstant * 300.0, 1e-9);
  EXPECT_THROW(preset("case3"), ConfigError);
}

TEST(ParseConfig, RoundTrip) {
  RunConfig cfg = preset("case2");
  cfg.scheme = SchemeKind::Symmetrized3;
  cfg.mass_spring.lambda = 5.0;
  cfg.external_force = {ExternalForceSpec::Kind::Constant, 0.25};
  cfg.seed = 99;
  cfg.output = "-";
  const RunConfig back = parse_config(json::parse(to_json(cfg).dump()));
  EXPECT_EQ(to_json(back), to_json(cfg));
}

TEST(ParseConfig, DefaultsAndOverrides) {
  const RunConfig cfg = parse_config(json::parse(R"({"schema_version": 1, "scheme": 2,
      "mass_spring": {"lambda": 10}, "gas": {"T0": 250}})"));
  EXPECT_EQ(cfg.scheme, SchemeKind::Midpoint2);
  EXPECT_EQ(cfg.mass_spring.lambda, 10.0);
  EXPECT_EQ(cfg.mass_spring.m, 5.0);
  EXPECT_NEAR(cfg.gas.U0, 1.5 * kGasConstant * 250.0, 1e-9);
}

TEST(ParseConfig, Errors) {
  EXPECT_THROW(parse_config(json::parse(R"({"scheme": 1})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"schema_version": 2})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"schema_version": 1, "scheme": 4})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"schema_version": 1, "h": 0})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"schema_version": 1, "steps": 0})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"schema_version": 1, "h": "fast"})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"schema_version": 1, "mass_spring": {"lambda": -1}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"schema_version": 1, "gas": {"U0": 1.0}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"schema_version": 1, "external_force": {"type": "spring"}})")),
               ConfigError);
  EXPECT_THROW(parse_config(json::parse("[1, 2]")), ConfigError);
}

TEST(LoadConfig, FilesystemErrors) {
  EXPECT_THROW(load_config("/nonexistent/run.json"), ConfigError);
  const std::string path = testing::TempDir() + "bad.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(load_config(path), ConfigError);
  {
    std::ofstream out(path);
    out << R"({"schema_version": 1, "scheme": 3})";
  }
  EXPECT_EQ(load_config(path).scheme, SchemeKind::Symmetrized3);
  std::remove(path.c_str());
}

TEST(BuildModel, ExternalForce) {
  RunConfig cfg = preset("case1");
  cfg.external_force = {ExternalForceSpec::Kind::Constant, 0.5};
  const SystemModel model = build_model(cfg);
  EXPECT_EQ(model.external(Vector::Zero(1), Vector::Zero(1), 0.0)[0], 0.5);
  EXPECT_EQ(build_model(preset("case1")).external(Vector::Zero(1), Vector::Zero(1), 0.0)[0], 0.0);
}
