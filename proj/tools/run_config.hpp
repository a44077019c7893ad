#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace puf::cli {

/// Flat `key = value` configuration. Lines starting with '#' are comments.
/// Units live in key names (e.g. precision_resistor_ohms).
class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& origin = "config");
  static RunConfig load(const std::filesystem::path& path);

  /// Adds or replaces an entry (command-line overrides).
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  double get_probability(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::optional<std::string> find(const std::string& key) const;

  /// Throws ValidationError naming every key that is neither listed in
  /// `allowed` nor starts with one of `allowed_prefixes`.
  void reject_unknown(const std::vector<std::string>& allowed,
                      const std::vector<std::string>& allowed_prefixes = {}) const;

 private:
  std::map<std::string, std::string> entries_;
};

double parse_double(const std::string& key, const std::string& text);

}  // namespace puf::cli
