#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dprime/runner.hpp"

using namespace dprime;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dprime-test-" + name);
  fs::remove_all(p);
  return p;
}

RunConfig transverse_config(const fs::path& out) {
  RunConfig c = parse_config_text(R"({
    "experiment": "transverse",
    "beta_grid": {"values": [0.1, 0.05]},
    "d_over_beta": [5, 10],
    "fd_n": 4000,
    "form_check": {"trials": 50},
    "tolerances": {"fd_relative": 1e-4}
  })");
  c.output_dir = out.string();
  return c;
}

std::vector<std::string> csv_bodies(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<std::string> out;
  for (const auto& f : files) out.push_back(slurp(f));
  return out;
}

}  // namespace

TEST(Config, DefaultsAndResolution) {
  const RunConfig c = parse_config_text(R"({"experiment": "effective", "surface": {"name": "torus"}})");
  EXPECT_EQ(c.surface.params.at("R"), 3.0);
  EXPECT_EQ(c.surface.params.at("r"), 1.0);
  EXPECT_NO_THROW(c.validate());
  const auto betas = c.beta_grid.resolve();
  ASSERT_EQ(betas.size(), 4u);
  EXPECT_NEAR(betas.front(), 0.05, 1e-15);
  EXPECT_NEAR(betas.back(), 0.005, 1e-15);
}

TEST(Config, UnknownKeysAreRejectedAtEveryLevel) {
  EXPECT_THROW(parse_config_text(R"({"experimnet": "full"})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"surface": {"name": "torus", "radius": 1}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"surface": {"name": "torus", "params": {"q": 1}}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"tolerances": {"fd": 1}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"beta_grid": {"step": 1}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"surface": {"name": "cube"}})"), ConfigError);
}

TEST(Config, InvalidValuesAreRejected) {
  auto invalid = [](const std::string& text) {
    RunConfig c = parse_config_text(text);
    EXPECT_THROW(c.validate(), ConfigError) << text;
  };
  invalid(R"({"experiment": "transverse", "beta_grid": {"values": [-0.1]}})");
  invalid(R"({"experiment": "transverse", "beta_grid": {"values": [1.5]}})");
  invalid(R"({"experiment": "effective", "mesh_sizes": [31]})");
  invalid(R"({"experiment": "effective", "jobs": 0})");
  invalid(R"({"experiment": "nothing"})");
  EXPECT_THROW(parse_config_text(R"({"count": 1.5})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"sign": "both"})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"seed": -1})"), ConfigError);
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, EchoRoundTrips) {
  RunConfig c = parse_config_text(R"({"experiment": "sphere", "d": 0.1, "sign": "minus"})");
  const RunConfig back = parse_config(to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -4e-300, 12345.678901234567}) EXPECT_EQ(std::stod(fmt17(x)), x);
  EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
}

TEST(Runner, CsvBodiesAreDeterministic) {
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  std::ostringstream log, err;
  RunConfig ca = transverse_config(a), cb = transverse_config(b);
  cb.jobs = 3;
  EXPECT_EQ(run(ca, log, err).exit_code, kExitPass) << err.str();
  EXPECT_EQ(run(cb, log, err).exit_code, kExitPass) << err.str();
  const auto x = csv_bodies(a), y = csv_bodies(b);
  ASSERT_FALSE(x.empty());
  EXPECT_EQ(x, y);
  EXPECT_TRUE(fs::exists(a / "manifest.json"));
  const Json m = Json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["experiments"][0]["experiment"], "transverse");
}

TEST(Runner, OutOfRegimeRowsWarnButDoNotFail) {
  const fs::path dir = scratch("regime");
  RunConfig c = transverse_config(dir);
  c.d_over_beta = {1.0, 5.0};
  std::ostringstream log, err;
  const RunOutcome o = run(c, log, err);
  EXPECT_EQ(o.exit_code, kExitPass) << err.str();
  EXPECT_NE(log.str().find("[WARN]"), std::string::npos);
}

TEST(Runner, ExitCodes) {
  std::ostringstream log, err;
  RunConfig bad = transverse_config(scratch("bad"));
  bad.beta_grid.values = {2.0};
  EXPECT_THROW(run(bad, log, err), ConfigError);

  RunConfig wide = parse_config_text(R"({"experiment": "effective", "surface": {"name": "torus"},
                                         "mesh_sizes": [16], "d": 1.5})");
  wide.output_dir = scratch("wide").string();
  EXPECT_EQ(run(wide, log, err).exit_code, kExitConfig);

  RunConfig fail = transverse_config(scratch("fail"));
  fail.tol.fd_relative = 1e-12;  // unreachable at fd_n = 4000
  EXPECT_EQ(run(fail, log, err).exit_code, kExitCheckFailed);

  RunConfig sphere_only = parse_config_text(R"({"experiment": "sphere", "surface": {"name": "torus"}})");
  sphere_only.output_dir = scratch("sphere").string();
  EXPECT_EQ(run(sphere_only, log, err).exit_code, kExitConfig);
}

TEST(Runner, ArtifactNames) {
  const fs::path dir = scratch("names");
  std::ostringstream log, err;
  run(transverse_config(dir), log, err);
  const Json m = Json::parse(slurp(dir / "manifest.json"));
  const std::string ts = m["timestamp"];
  for (const auto& f : m["experiments"][0]["artifacts"]) {
    const std::string name = f;
    EXPECT_EQ(name.rfind("transverse-sphere-" + ts, 0), 0u) << name;
    EXPECT_TRUE(fs::exists(dir / name));
  }
}
