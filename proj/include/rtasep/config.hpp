#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtasep/disorder.hpp"
#include "rtasep/types.hpp"

namespace rtasep {

/// Invalid or incomplete run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Seed kDefaultSeed = 271828;

/// Raw `key = value` entries grouped by `[section]`. Comments start with
/// ';' or '#'.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& origin = "<config>");
  static ConfigFile load(const std::string& path);

  bool has_section(const std::string& section) const { return entries_.count(section) > 0; }
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::map<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> entries_;
};

struct KeySpec {
  std::string section;
  std::string key;
  std::string default_value;
  bool required_with_file = false;  // must be present whenever a config file is given
};

/// Schema keys of a subcommand, including the law and run sections.
const std::vector<KeySpec>& schema_for(const std::string& command);
const std::vector<std::string>& known_commands();

/// Config after defaults, validated against the schema. Typed getters
/// throw ConfigError naming "section.key".
class ResolvedConfig {
 public:
  ResolvedConfig(std::string command, const ConfigFile* file);

  const std::string& command() const { return command_; }
  bool has(const std::string& section, const std::string& key) const;
  std::string text(const std::string& section, const std::string& key) const;
  double number(const std::string& section, const std::string& key) const;
  std::int64_t integer(const std::string& section, const std::string& key) const;
  bool flag(const std::string& section, const std::string& key) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  /// The [law] block as a RateLaw; parameter errors become ConfigError.
  RateLaw law() const;
  bool has_law() const;

  /// ("section.key", value) in schema order.
  std::vector<std::pair<std::string, std::string>> entries() const;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;  // "section.key"
  std::vector<std::string> order_;
};

/// `git describe` of the source tree at configure time.
const char* build_git_describe();

}  // namespace rtasep
