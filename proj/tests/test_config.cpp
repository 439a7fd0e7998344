#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "ttesim/config.hpp"
#include "ttesim/identification.hpp"

using namespace ttesim;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = TTESIM_SOURCE_DIR;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ttesim_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TTESIM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("empty config equals the bundled baseline") {
  const auto dir = scratch_dir("empty");
  const auto empty = load_config(write_file(dir / "empty.json", ""));
  CHECK(empty == RunConfig{});
  CHECK(empty == load_config(kSource / "configs/baseline.json"));
}

TEST_CASE("invalid values are reported with their path") {
  try {
    parse_config(nlohmann::json::parse(R"({"battery": {"v_cut": -1, "eta": 2}, "runs": 0})"));
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ValidationError);
    const std::string what = e.what();
    CHECK(what.find("battery.v_cut") != std::string::npos);
    CHECK(what.find("battery.eta") != std::string::npos);
    CHECK(what.find("runs") != std::string::npos);
  }
}

TEST_CASE("unknown keys and type errors are rejected") {
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"batery": {}})")), Error);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"runs": "many"})")), Error);
}

TEST_CASE("a debounce window shorter than the step is rejected") {
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"battery": {"dt_persist_s": 0.5}})")), Error);
}

TEST_CASE("overriding one field leaves the rest at defaults") {
  const auto cfg = parse_config(nlohmann::json::parse(R"({"scenario": {"t_env_k": 253.15}})"));
  RunConfig expected;
  expected.scenario.t_env = 253.15;
  expected.scenario.initial.t_core = 253.15;
  CHECK(cfg == expected);
  CHECK_FALSE(cfg == RunConfig{});
}

TEST_CASE("malformed json is a parse error") {
  const auto dir = scratch_dir("bad");
  try {
    load_config(write_file(dir / "bad.json", "{\"runs\": "));
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ParseError);
  }
  try {
    load_config(dir / "missing.json");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IoError);
  }
}

TEST_CASE("serialisation round-trips") {
  for (const char* name : {"configs/baseline.json", "configs/cold_bursty.json"}) {
    const auto cfg = load_config(kSource / name);
    CHECK(parse_config(serialize_config(cfg)) == cfg);
    CHECK(serialize_config(parse_config(serialize_config(cfg))) == serialize_config(cfg));
  }
  RunConfig custom;
  custom.scenario.battery.du_dT = EntropicMap{{0.5}, {-1e-4, 2e-5}};
  custom.scenario.aging = AgingParams{};
  custom.scenario.aging->n_cycles = 300;
  custom.scenario.load_profile = {LoadProfile::Kind::Current, {0.0, 60.0}, {1.0, 2.5}};
  custom.scenario.throttle = ThrottlePolicy{};
  custom.sobol.inputs = {{SensitivityParam::TEnv, 250.0, 290.0}, {SensitivityParam::Eta, 0.85, 0.95}};
  custom.validate.reference_tte = 1234.5;
  CHECK(parse_config(serialize_config(custom)) == custom);
}

TEST_CASE("cli rejects unknown commands") {
  CHECK(run_cli("frobnicate") != 0);
  CHECK(run_cli("") != 0);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("cli exit codes") {
  const auto dir = scratch_dir("codes");
  write_file(dir / "bad.json", R"({"battery": {"v_cut": -1}})");
  CHECK(run_cli("simulate --config " + (dir / "bad.json").string()) == 2);
  CHECK(run_cli("simulate --config " + (dir / "nope.json").string()) == 4);
  CHECK(run_cli("identify --data " + (dir / "nope.csv").string() + " --out " + dir.string()) == 4);
}

TEST_CASE("cli simulate writes its result files") {
  const auto dir = scratch_dir("simulate");
  REQUIRE(run_cli("simulate --runs 20 --out " + dir.string()) == 0);
  for (const char* f : {"tte_samples.csv", "survival.csv", "soc_envelope.csv", "summary.json"}) {
    CHECK(fs::exists(dir / f));
  }
  std::ifstream in(dir / "tte_samples.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "run_index,tte_s,cause,censored");
}

TEST_CASE("identified parameters load into simulate unchanged") {
  const auto dir = scratch_dir("identify");
  REQUIRE(run_cli("identify --data " + (kSource / "data/pulse_cycles.csv").string() + " --out " + dir.string()) == 0);
  REQUIRE(fs::exists(dir / "identified_params.json"));
  const auto cfg = load_config(dir / "identified_params.json");
  CHECK(cfg.scenario.battery.r_ref == doctest::Approx(0.05).epsilon(0.01));
  CHECK(run_cli("simulate --runs 5 --config " + (dir / "identified_params.json").string() + " --out " +
                (dir / "sim").string()) == 0);
}

TEST_CASE("cli sign-convention flag") {
  const auto dir = scratch_dir("sign");
  write_cycles_csv(dir / "neg.csv", ingest_cycles(kSource / "data/pulse_cycles.csv"), true);
  REQUIRE(run_cli("identify --data " + (kSource / "data/pulse_cycles.csv").string() + " --out " +
                  (dir / "pos").string()) == 0);
  REQUIRE(run_cli("identify --discharge-negative --data " + (dir / "neg.csv").string() + " --out " +
                  (dir / "neg").string()) == 0);
  CHECK(load_config(dir / "pos" / "identified_params.json") == load_config(dir / "neg" / "identified_params.json"));
}

TEST_CASE("cli validate on the reference fixture") {
  const auto dir = scratch_dir("validate");
  CHECK(run_cli("validate --config " + (kSource / "configs/reference.json").string() + " --reference " +
                (kSource / "data/reference_trace.csv").string() + " --out " + dir.string()) == 0);
  std::ifstream in(dir / "summary.json");
  const auto summary = nlohmann::json::parse(in);
  CHECK(summary.at("mape_pct").get<double>() == 0.0);
  CHECK(summary.at("delta_tau_s").get<double>() == 0.0);
}
