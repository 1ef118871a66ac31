#include <doctest.h>

#include <sstream>

#include "rtasep/config.hpp"

using namespace rtasep;

namespace {

ConfigFile parse(const std::string& text) {
  std::istringstream in(text);
  return ConfigFile::parse(in);
}

const char* kLaw = "[law]\nc = 0.5\nnu = 1\nkappa = 4\neps = 0.5\n";

}  // namespace

TEST_CASE("config file: sections, comments, whitespace") {
  const ConfigFile f = parse("# note\n[law]\nc = 0.5 \n; other\n[run]\nseed=7\n");
  CHECK(f.get("law", "c").value() == "0.5");
  CHECK(f.get("run", "seed").value() == "7");
  CHECK_FALSE(f.get("run", "jobs").has_value());
  CHECK_THROWS_AS(parse("c = 1\n"), ConfigError);
}

TEST_CASE("resolved config: defaults without a file") {
  const ResolvedConfig cfg("thm1", nullptr);
  CHECK(cfg.integer("run", "seed") == static_cast<std::int64_t>(kDefaultSeed));
  CHECK(cfg.numbers("experiment", "t") == std::vector<double>{1e3, 1e4, 1e5});
  CHECK(cfg.law().kappa() == 4.0);
  CHECK(cfg.integer("experiment", "replicas") == 200);
}

TEST_CASE("resolved config: missing and unknown keys are errors") {
  const ConfigFile missing = parse("[law]\nc = 0.5\nnu = 1\neps = 0.5\n");
  CHECK_THROWS_WITH_AS(ResolvedConfig("simulate", &missing), "missing required key law.kappa", ConfigError);
  const ConfigFile unknown = parse(std::string(kLaw) + "[experiment]\nreplica = 3\n");
  CHECK_THROWS_WITH_AS(ResolvedConfig("thm1", &unknown), "unknown config key experiment.replica for command thm1",
                       ConfigError);
  const ConfigFile ok = parse(std::string(kLaw) + "[experiment]\nreplicas = 3\n");
  CHECK(ResolvedConfig("thm1", &ok).integer("experiment", "replicas") == 3);
  CHECK_THROWS_AS(ResolvedConfig("nope", nullptr), ConfigError);
}

TEST_CASE("resolved config: typed getters") {
  const ConfigFile f = parse(std::string(kLaw) + "[experiment]\nreplicas = 2.5\nt = 1e3, x\n");
  const ResolvedConfig thm("thm1", &f);
  CHECK_THROWS_AS(thm.integer("experiment", "replicas"), ConfigError);
  CHECK_THROWS_AS(thm.numbers("experiment", "t"), ConfigError);
  const ConfigFile bad_law = parse("[law]\nc = 0.5\nnu = 1\nkappa = 9\neps = 0.5\n");
  CHECK_THROWS_AS(ResolvedConfig("thm1", &bad_law).law(), ConfigError);
  ResolvedConfig r("rost", nullptr);
  CHECK_FALSE(r.has_law());
  CHECK_THROWS_AS(r.law(), ConfigError);
  r.set("run", "seed", "9");
  CHECK(r.integer("run", "seed") == 9);
  CHECK_THROWS_AS(r.set("run", "colour", "red"), ConfigError);
}

TEST_CASE("every command has a schema") {
  for (const std::string& c : known_commands()) CHECK_FALSE(schema_for(c).empty());
  CHECK(known_commands().size() == 10);
}
