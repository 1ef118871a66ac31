#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "cli_runner.hpp"

namespace fs = std::filesystem;
using testing_cli::run_cli;
using testing_cli::slurp;
using testing_cli::write_file;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "rtasep_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kTinySim =
    "[law]\nc = 0.5\nnu = 1\nkappa = 4\neps = 0.5\n"
    "[experiment]\nmode = tagged\nt = 3\nsnapshots = 0,1.5,3\nrecord_events = true\n";

}  // namespace

TEST_CASE("cli: missing kappa exits 2 naming the key") {
  const fs::path d = scratch("missing");
  write_file(d / "c.ini", "[law]\nc = 0.5\nnu = 1\neps = 0.5\n");
  const auto r = run_cli("simulate --config c.ini", d);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("law.kappa") != std::string::npos);
  CHECK_FALSE(fs::exists(d / "out"));
}

TEST_CASE("cli: unknown keys and bad values exit 2") {
  const fs::path d = scratch("unknown");
  write_file(d / "c.ini", std::string(kTinySim) + "colour = red\n");
  CHECK(run_cli("simulate --config c.ini", d).exit_code == 2);
  write_file(d / "m.ini", "[law]\nc = 0.5\nnu = 1\nkappa = 4\neps = 0.5\n[experiment]\nmode = sideways\n");
  CHECK(run_cli("simulate --config m.ini", d).exit_code == 2);
  CHECK(run_cli("rost --jobs 0", d).exit_code == 2);
  CHECK(run_cli("frobnicate", d).exit_code == 2);
}

TEST_CASE("cli: thm1 with nu < 0 is a hypothesis error") {
  const fs::path d = scratch("hyp");
  write_file(d / "c.ini", "[law]\nc = 0.5\nnu = -0.5\nkappa = 1.4142135623730951\neps = 0.5\n");
  const auto r = run_cli("thm1 --config c.ini", d);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("requires nu > 0") != std::string::npos);
}

TEST_CASE("cli: tiny simulate run writes outputs and echoes the seed") {
  const fs::path d = scratch("sim");
  write_file(d / "c.ini", kTinySim);
  const auto r = run_cli("simulate --config c.ini --seed 4242 --out run", d);
  REQUIRE(r.exit_code == 0);
  for (const char* f : {"snapshots.csv", "rates.csv", "events.csv", "manifest.json", "timing.json"}) {
    CHECK(fs::exists(d / "run" / f));
  }
  const auto m = nlohmann::json::parse(slurp(d / "run" / "manifest.json"));
  CHECK(m["seed"].get<std::uint64_t>() == 4242);
  CHECK(m["command"] == "simulate");
  CHECK(m["config"]["run.seed"] == "4242");
  CHECK(m["law"]["u_star"].get<double>() == doctest::Approx(2.0));
  CHECK(slurp(d / "run" / "snapshots.csv").rfind("time,label,position,gap,height\n", 0) == 0);
}

TEST_CASE("cli: same config twice gives byte-identical outputs") {
  const fs::path d = scratch("det");
  write_file(d / "c.ini", kTinySim);
  REQUIRE(run_cli("simulate --config c.ini --out a", d).exit_code == 0);
  REQUIRE(run_cli("simulate --config c.ini --out b", d).exit_code == 0);
  for (const char* f : {"snapshots.csv", "rates.csv", "events.csv", "manifest.json"}) {
    CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
  }
}

TEST_CASE("cli: json format and dry run") {
  const fs::path d = scratch("fmt");
  write_file(d / "c.ini", std::string(kTinySim) + "[run]\nformat = json\n");
  REQUIRE(run_cli("simulate --config c.ini --out j", d).exit_code == 0);
  const auto rows = nlohmann::json::parse(slurp(d / "j" / "snapshots.json"));
  REQUIRE(rows.is_array());
  CHECK(rows[0].contains("position"));

  const auto plan = run_cli("thm1 --dry-run --out dry", d);
  CHECK(plan.exit_code == 0);
  CHECK(plan.output.find("replicas: 200") != std::string::npos);
  CHECK(plan.output.find("memory estimate") != std::string::npos);
  CHECK_FALSE(fs::exists(d / "dry"));
}

TEST_CASE("cli: --assert turns failed checks into exit 3") {
  const fs::path d = scratch("assert");
  // An impossible slope range fails the check.
  write_file(d / "c.ini",
             "[law]\nc = 0.5\nnu = 1\nkappa = 4\neps = 0.5\n"
             "[experiment]\nt = 100,1000\nreplicas = 10\nslope_lo = 5\nslope_hi = 6\n");
  CHECK(run_cli("thm2 --config c.ini --out x", d).exit_code == 0);
  CHECK(run_cli("thm2 --config c.ini --out y --assert", d).exit_code == 3);
}
