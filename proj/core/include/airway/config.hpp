#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace airway {

/// Flat `section.key = value` configuration. `#` starts a comment.
/// Accessors record which keys were read; see reject_unused().
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, std::string_view origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list; empty entries are rejected.
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const;

  /// Throws ValidationError naming every key never read.
  void reject_unused() const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<config>";
  mutable std::set<std::string> used_;
};

/// Parses "a,b,c" into doubles; throws ValidationError on junk.
std::vector<double> parse_double_list(std::string_view text, std::string_view what);

}  // namespace airway
