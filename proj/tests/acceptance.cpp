// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cli_runner.hpp"
#include "rtasep/config.hpp"
#include "rtasep/experiments.hpp"
#include "rtasep/variational.hpp"

namespace fs = std::filesystem;
using namespace rtasep;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

const RateLaw kRef{0.5, 1.0, 4.0, 0.5};

Verdict variational_exactness(Seed seed, int) {
  const VarcheckReport r = varcheck(kRef, VarcheckOptions{}, seed);
  std::int64_t audited = 0;
  for (const VarcheckTrial& t : r.trials) audited += t.audit_passed ? 1 : 0;
  Verdict v;
  v.pass = r.trials.size() == 1000 && r.svar1_mismatches == 0 && r.svar2_mismatches == 0 &&
           r.svar4_mismatches == 0 && r.sweep_mismatches == 0 && r.audit_failures == 0;
  v.detail = "trials=" + std::to_string(r.trials.size()) + " svar1/svar2/svar4 mismatches=" +
             std::to_string(r.svar1_mismatches) + "/" + std::to_string(r.svar2_mismatches) + "/" +
             std::to_string(r.svar4_mismatches) + " audited=" + std::to_string(audited) +
             " (K t window widened in " + std::to_string(r.widened) + ")";
  return v;
}

Verdict lemma1(Seed seed, int) {
  Lemma1Config cfg;
  cfg.seed = seed;
  cfg.n_grid = {1e6, 1e8};
  const auto pts = lemma1_curve(cfg);
  const RateLaw& law = cfg.law;
  bool exact_ok = true;
  for (const Lemma1Point& p : pts) {
    // Independent evaluation of (1 - F(c + q2 N^-alpha))^floor(q1 N^(1-alpha)) for nu = 1.
    const double q = p.q2 / std::cbrt(p.n);
    const double len = std::floor(p.q1 * std::cbrt(p.n * p.n));
    const double direct = std::exp(len * std::log1p(-law.kappa() * q * q));
    exact_ok = exact_ok && std::abs(p.estimate.exact - direct) <= 1e-12 * direct;
  }
  const Lemma1Point& mc = pts[0];
  const Lemma1Point& big = pts[1];
  const double limit_err = std::abs(big.estimate.exact - std::exp(-1.0));
  const double z = mc.z_score();
  Verdict v;
  v.pass = exact_ok && limit_err <= 1e-3 && mc.sampled && mc.estimate.replicas == 100000 && std::abs(z) <= 4.0;
  v.detail = "exact formula " + std::string(exact_ok ? "matches" : "differs") + ", |P(1e8) - e^-1|=" +
             fmt(limit_err, 3) + ", MC at 1e6: " + fmt(mc.estimate.empirical, 5) + " vs " +
             fmt(mc.estimate.exact, 5) + " (z=" + fmt(z, 3) + ")";
  return v;
}

Verdict burke(Seed seed, int jobs) {
  BurkeConfig cfg;
  cfg.seed = seed;
  cfg.jobs = jobs;
  const BurkeResult r = burke_check(cfg);
  const double z = (r.mean - 45.0) / r.std_error;
  Verdict v;
  v.pass = std::abs(z) <= 4.0 && r.dispersion >= 0.95 && r.dispersion <= 1.05 && r.gap_chi2.p_value >= 1e-3;
  v.detail = "mean=" + fmt(r.mean, 5) + " (z=" + fmt(z, 3) + "), var/mean=" + fmt(r.dispersion, 4) +
             ", gap chi2 p=" + fmt(r.gap_chi2.p_value, 3) + ", inter-jump KS p=" + fmt(r.interjump_ks.p_value, 3);
  return v;
}

Verdict coupling(Seed seed, int) {
  CouplingConfig cfg;
  cfg.seed = seed;
  const CouplingReport r = coupling_check(cfg);
  Verdict v;
  v.pass = r.trials == 1000 && r.basic_violations == 0 && r.fastened_violations == 0;
  v.detail = "trials=" + std::to_string(r.trials) + " rings checked=" + std::to_string(r.events) +
             " basic violations=" + std::to_string(r.basic_violations) +
             " fastened violations=" + std::to_string(r.fastened_violations);
  return v;
}

// Criteria 5 and 6 share one ensemble.
std::optional<Theorem1Result> thm1_cache;

const Theorem1Result& thm1_result(Seed seed, int jobs) {
  if (!thm1_cache) {
    Theorem1Config cfg;
    cfg.seed = seed;
    cfg.jobs = jobs;
    thm1_cache = theorem1(cfg);
  }
  return *thm1_cache;
}

Verdict thm1_exponent(Seed seed, int jobs) {
  const Theorem1Result& r = thm1_result(seed, jobs);
  Verdict v;
  v.pass = r.fit.valid && r.fit.slope >= 0.567 && r.fit.slope <= 0.767 && r.displacement[0].size() >= 200;
  v.detail = "slope=" + fmt(r.fit.slope) + " +- " + fmt(r.fit.slope_se, 2) + " over t=1e3,1e4,1e5, " +
             std::to_string(r.displacement[0].size()) + " replicas";
  return v;
}

Verdict thm1_bracket(Seed seed, int jobs) {
  const Theorem1Result& r = thm1_result(seed, jobs);
  const double lo = r.bounds.lower(1.0);
  const double hi = r.bounds.upper(1.0);
  std::vector<TailPoint> at_one;
  for (const TailCurve& c : r.tails) {
    for (const TailPoint& p : c.points) {
      if (p.param == 1.0) at_one.push_back(p);
    }
  }
  const TrendCheck trend = trend_toward(at_one, lo, hi);
  const double last = at_one.back().empirical;
  Verdict v;
  v.pass = at_one.size() == 3 && trend.passed && last >= 0.5 * lo && last <= 2.0 * hi;
  std::string tails;
  for (const TailPoint& p : at_one) tails += (tails.empty() ? "" : ", ") + fmt(p.empirical, 3);
  v.detail = "P(w > 1) by horizon: " + tails + "; bracket [" + fmt(lo, 3) + ", " + fmt(hi, 3) + "], inversions=" +
             std::to_string(trend.inversions);
  return v;
}

Verdict thm2(Seed seed, int jobs) {
  FrontConfig cfg;
  cfg.seed = seed;
  cfg.jobs = jobs;
  cfg.horizons = {1e3, 1e4, 1e5};
  cfg.replicas = 200;
  const Theorem2Result r = theorem2(cfg, {0.5});
  const TailPoint& p = r.tails.back().points.front();
  Verdict v;
  v.pass = r.fit.valid && r.fit.slope >= 0.567 && r.fit.slope <= 0.767 && p.empirical < 2.0 * p.bound_upper;
  v.detail = "slope=" + fmt(r.fit.slope) + " +- " + fmt(r.fit.slope_se, 2) + ", P(X > 0.5 t^(2/3)) at 1e5=" +
             fmt(p.empirical, 3) + " vs 2*upper=" + fmt(2.0 * p.bound_upper, 3);
  return v;
}

Verdict thm4(Seed seed, int jobs) {
  FrontConfig cfg;
  cfg.law = RateLaw(0.5, -0.5, std::sqrt(2.0), 0.5);
  cfg.seed = seed;
  cfg.jobs = jobs;
  cfg.horizons = {1e4, 1e5, 1e6};
  cfg.replicas = 100;
  const Theorem4Result r = theorem4(cfg, 0.1);
  Verdict v;
  v.pass = r.fit.valid && r.fit.slope >= 0.10 && r.fit.slope <= 0.35;
  v.detail = "slope=" + fmt(r.fit.slope) + " +- " + fmt(r.fit.slope_se, 2) + " (bracket [" + fmt(r.lower_exponent, 3) +
             ", " + fmt(r.upper_exponent, 3) + "], 100 replicas)";
  return v;
}

Verdict rost(Seed seed, int jobs) {
  RostConfig cfg;
  cfg.seed = seed;
  cfg.jobs = jobs;
  const auto bins = rost_profile(cfg);
  double at0 = NAN, left = NAN, right = NAN;
  for (const RostBin& b : bins) {
    if (b.x == 0.0) at0 = b.density;
    if (b.x == -1.5) left = b.density;
    if (b.x == 1.5) right = b.density;
  }
  Verdict v;
  v.pass = std::abs(at0 - 0.5) <= 0.02 && left >= 0.98 && right <= 0.02;
  v.detail = "density(0)=" + fmt(at0, 4) + ", density(-1.5)=" + fmt(left, 4) + ", density(1.5)=" + fmt(right, 4);
  return v;
}

Verdict determinism(const fs::path& work) {
  const std::string law = "[law]\nc = 0.5\nnu = 1\nkappa = 4\neps = 0.5\n";
  const std::vector<std::pair<std::string, std::string>> configs = {
      {"simulate", law + "[experiment]\nmode = tagged\nt = 4\nsnapshots = 0,2,4\nrecord_events = true\n"},
      {"lemma1", "[law]\nc = 0.5\nnu = 1\nkappa = 1\neps = 0.5\n[experiment]\nN = 1e3,1e8\nreplicas = 500\n"},
      {"thm1", law + "[experiment]\nt = 50,200\nreplicas = 8\n"},
      {"thm2", law + "[experiment]\nt = 50,200\nreplicas = 8\n"},
      {"thm3", "[law]\nc = 0.5\nnu = 0\nkappa = 2\neps = 0.5\n[experiment]\nt = 50,200\nreplicas = 8\n"},
      {"thm4",
       "[law]\nc = 0.5\nnu = -0.5\nkappa = 1.4142135623730951\neps = 0.5\n[experiment]\nt = 50,200\nreplicas = 8\n"},
      {"burke", law + "[experiment]\nt = 5\nreplicas = 50\nfield_labels = 200\n"},
      {"varcheck", law + "[experiment]\ntrials = 20\n"},
      {"rost", "[experiment]\nt = 100\nreplicas = 4\n"},
      {"glynnwhitt", "[experiment]\nt = 100,400\nreplicas = 6\n"},
  };
  std::vector<std::string> differing;
  std::set<std::string> failed;
  for (const auto& [cmd, text] : configs) {
    const fs::path dir = work / "determinism" / cmd;
    fs::remove_all(dir);
    testing_cli::write_file(dir / "config.ini", text);
    for (const char* out : {"first", "second"}) {
      const auto r = testing_cli::run_cli(cmd + " --config config.ini --seed 99 --out " + out, dir);
      if (r.exit_code != 0) failed.insert(cmd);
    }
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir / "first")) {
      const std::string name = e.path().filename().string();
      if (name == "timing.json") continue;
      ++files;
      if (testing_cli::slurp(e.path()) != testing_cli::slurp(dir / "second" / name)) differing.push_back(cmd + "/" + name);
    }
    if (files < 2) failed.insert(cmd);
  }
  Verdict v;
  v.pass = differing.empty() && failed.empty();
  v.detail = std::to_string(configs.size()) + " subcommands, differing files=" + std::to_string(differing.size());
  for (const auto& d : differing) v.detail += " " + d;
  for (const auto& f : failed) v.detail += " failed:" + f;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = (fs::temp_directory_path() / "rtasep_acceptance").string();
  Seed seed = kDefaultSeed;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<int> only;
  app.add_option("--work-dir", work, "scratch directory for CLI runs");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    std::string name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "variational exactness", [&] { return variational_exactness(seed, jobs); }},
      {2, "slow-rate scan exact and Monte Carlo tiers", [&] { return lemma1(seed, jobs); }},
      {3, "equilibrium and Burke property", [&] { return burke(seed, jobs); }},
      {4, "coupling monotonicity", [&] { return coupling(seed, jobs); }},
      {5, "tagged particle exponent", [&] { return thm1_exponent(seed, jobs); }},
      {6, "tagged particle bracket trend", [&] { return thm1_bracket(seed, jobs); }},
      {7, "jam front exponent and bracket", [&] { return thm2(seed, jobs); }},
      {8, "jam front exponent, nu < 0", [&] { return thm4(seed, jobs); }},
      {9, "constant-rate density profile", [&] { return rost(seed, jobs); }},
      {10, "determinism of every subcommand", [&] { return determinism(work); }},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += v.pass ? 0 : 1;
    std::cout << "criterion " << std::setw(2) << c.id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << c.name << "  ["
              << v.detail << "] (" << fmt(secs, 3) << " s)" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
