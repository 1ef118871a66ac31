#include "rtasep/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace rtasep {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<KeySpec> law_keys(const std::string& c, const std::string& nu, const std::string& kappa,
                              const std::string& eps) {
  return {{"law", "c", c, true}, {"law", "nu", nu, true}, {"law", "kappa", kappa, true}, {"law", "eps", eps, true}};
}

std::vector<KeySpec> run_keys() {
  return {{"run", "seed", std::to_string(kDefaultSeed)}, {"run", "jobs", "1"}, {"run", "format", "csv"}};
}

std::vector<KeySpec> join(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::map<std::string, std::vector<KeySpec>> build_schemas() {
  const auto ref = law_keys("0.5", "1", "4", "0.5");
  std::map<std::string, std::vector<KeySpec>> s;
  s["simulate"] = join(join(ref,
                            {{"experiment", "mode", "tagged"},
                             {"experiment", "t", "10"},
                             {"experiment", "K", "3"},
                             {"experiment", "margin", "0"},
                             {"experiment", "gap_family", "geometric"},
                             {"experiment", "u", "3"},
                             {"experiment", "two_point_upper", ""},
                             {"experiment", "a", "0.45"},
                             {"experiment", "labels", "64"},
                             {"experiment", "snapshots", "0,5,10"},
                             {"experiment", "record_events", "false"}}),
                       run_keys());
  s["lemma1"] = join(join(law_keys("0.5", "1", "1", "0.5"),
                          {{"experiment", "q1", "1"},
                           {"experiment", "q2", "1"},
                           {"experiment", "N", "1e4,1e6,1e8"},
                           {"experiment", "replicas", "100000"},
                           {"experiment", "mc_max_n", "1e6"},
                           {"experiment", "limit_tolerance", "1e-3"},
                           {"experiment", "max_z", "4"}}),
                     run_keys());
  s["thm1"] = join(join(ref,
                        {{"experiment", "u", "3"},
                         {"experiment", "gap_family", "geometric"},
                         {"experiment", "two_point_upper", ""},
                         {"experiment", "t", "1e3,1e4,1e5"},
                         {"experiment", "z", "0,0.25,0.5,0.75,1,1.5,2"},
                         {"experiment", "replicas", "200"},
                         {"experiment", "slope_lo", "0.567"},
                         {"experiment", "slope_hi", "0.767"},
                         {"experiment", "z_check", "1"}}),
                   run_keys());
  s["thm2"] = join(join(ref,
                        {{"experiment", "t", "1e3,1e4,1e5"},
                         {"experiment", "b", "0,0.25,0.5,0.75,1,1.5"},
                         {"experiment", "replicas", "200"},
                         {"experiment", "slope_lo", "0.567"},
                         {"experiment", "slope_hi", "0.767"},
                         {"experiment", "b_check", "0.5"}}),
                   run_keys());
  s["thm3"] = join(join(law_keys("0.5", "0", "2", "0.5"),
                        {{"experiment", "t", "1e4,1e5"},
                         {"experiment", "a", "0.01,0.1,0.5"},
                         {"experiment", "b", "1,3,10,1000"},
                         {"experiment", "replicas", "200"},
                         {"experiment", "a_check", "0.01"},
                         {"experiment", "b_check", "1000"},
                         {"experiment", "min_frequency", "0.9"}}),
                   run_keys());
  s["thm4"] = join(join(law_keys("0.5", "-0.5", "1.4142135623730951", "0.5"),
                        {{"experiment", "t", "1e4,1e5,1e6"},
                         {"experiment", "replicas", "100"},
                         {"experiment", "margin", "0.1"}}),
                   run_keys());
  s["burke"] = join(join(ref,
                         {{"experiment", "a", "0.45"},
                          {"experiment", "t", "100"},
                          {"experiment", "replicas", "10000"},
                          {"experiment", "field_labels", "10000"},
                          {"experiment", "window", "64"},
                          {"experiment", "intervals", "5"},
                          {"experiment", "max_z", "4"},
                          {"experiment", "dispersion_lo", "0.95"},
                          {"experiment", "dispersion_hi", "1.05"},
                          {"experiment", "level", "1e-3"}}),
                    run_keys());
  s["varcheck"] = join(join(ref,
                            {{"experiment", "trials", "1000"},
                             {"experiment", "max_particles", "20"},
                             {"experiment", "t_max", "10"},
                             {"experiment", "K", "3"},
                             {"experiment", "gap_mean", "1.5"}}),
                       run_keys());
  s["rost"] = join({{"experiment", "rate", "1"},
                    {"experiment", "t", "1e4"},
                    {"experiment", "replicas", "100"},
                    {"experiment", "x", "-1.5,-1,-0.5,0,0.5,1,1.5"},
                    {"experiment", "halfwidth", "0.1"},
                    {"experiment", "tolerance", "0.02"}},
                   run_keys());
  s["glynnwhitt"] = join({{"experiment", "rate", "1"},
                          {"experiment", "a", "1"},
                          {"experiment", "gamma", "0.5"},
                          {"experiment", "t", "1e3,1e4,1e5"},
                          {"experiment", "replicas", "100"}},
                         run_keys());
  return s;
}

const std::map<std::string, std::vector<KeySpec>>& schemas() {
  static const auto s = build_schemas();
  return s;
}

double parse_number(const std::string& name, const std::string& raw) {
  const std::string v = trim(raw);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key " + name + ": '" + v + "' is not a number");
  }
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& origin) {
  // The ini reader knows ';' comments only; accept '#' too.
  std::stringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    cleaned << (!t.empty() && t[0] == '#' ? ";" + t : line) << '\n';
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ConfigFile f;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(origin + ": key '" + section + "' outside any [section]");
    auto& sec = f.entries_[section];
    for (const auto& [key, value] : body) sec[key] = trim(value.data());
  }
  return f;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse(in, path);
}

std::optional<std::string> ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto s = entries_.find(section);
  if (s == entries_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

const std::vector<KeySpec>& schema_for(const std::string& command) {
  const auto it = schemas().find(command);
  if (it == schemas().end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> names = {"simulate", "lemma1", "thm1",     "thm2", "thm3",
                                                 "thm4",     "burke",  "varcheck", "rost", "glynnwhitt"};
  return names;
}

ResolvedConfig::ResolvedConfig(std::string command, const ConfigFile* file) : command_(std::move(command)) {
  const auto& schema = schema_for(command_);
  for (const KeySpec& k : schema) {
    const std::string name = k.section + "." + k.key;
    std::optional<std::string> v = file ? file->get(k.section, k.key) : std::nullopt;
    if (!v && file && k.required_with_file) throw ConfigError("missing required key " + name);
    values_[name] = v.value_or(k.default_value);
    order_.push_back(name);
  }
  if (file) {
    for (const auto& [section, keys] : file->entries()) {
      for (const auto& [key, value] : keys) {
        (void)value;
        if (!values_.count(section + "." + key)) {
          throw ConfigError("unknown config key " + section + "." + key + " for command " + command_);
        }
      }
    }
  }
}

bool ResolvedConfig::has(const std::string& section, const std::string& key) const {
  return values_.count(section + "." + key) > 0;
}

std::string ResolvedConfig::text(const std::string& section, const std::string& key) const {
  const auto it = values_.find(section + "." + key);
  if (it == values_.end()) throw ConfigError("config key " + section + "." + key + " is not defined for " + command_);
  return it->second;
}

double ResolvedConfig::number(const std::string& section, const std::string& key) const {
  return parse_number(section + "." + key, text(section, key));
}

std::int64_t ResolvedConfig::integer(const std::string& section, const std::string& key) const {
  const double d = number(section, key);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) {
    throw ConfigError("config key " + section + "." + key + " must be an integer");
  }
  return static_cast<std::int64_t>(d);
}

bool ResolvedConfig::flag(const std::string& section, const std::string& key) const {
  const std::string v = trim(text(section, key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key " + section + "." + key + " must be true or false");
}

std::vector<double> ResolvedConfig::numbers(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(text(section, key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(section + "." + key, item));
  if (out.empty()) throw ConfigError("config key " + section + "." + key + " needs at least one value");
  return out;
}

void ResolvedConfig::set(const std::string& section, const std::string& key, const std::string& value) {
  const std::string name = section + "." + key;
  if (!values_.count(name)) throw ConfigError("config key " + name + " is not defined for " + command_);
  values_[name] = value;
}

bool ResolvedConfig::has_law() const { return has("law", "c"); }

RateLaw ResolvedConfig::law() const {
  if (!has_law()) throw ConfigError("command " + command_ + " takes no [law] section");
  try {
    return RateLaw(number("law", "c"), number("law", "nu"), number("law", "kappa"), number("law", "eps"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::pair<std::string, std::string>> ResolvedConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string& name : order_) out.emplace_back(name, values_.at(name));
  return out;
}

const char* build_git_describe() {
#ifdef RTASEP_GIT_DESCRIBE
  return RTASEP_GIT_DESCRIBE;
#else
  return "unknown";
#endif
}

}  // namespace rtasep
