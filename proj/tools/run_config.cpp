#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "puf/bit_matrix.hpp"
#include "puf/error.hpp"

namespace puf::cli {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw ValidationError("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return value;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line.substr(0, line.find('#')));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(content.substr(0, eq));
    const auto value = trim(content.substr(eq + 1));
    if (key.empty()) throw ValidationError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (!config.entries_.emplace(key, value).second) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return parse(read_text_file(path), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) { entries_[key] = value; }

std::optional<std::string> RunConfig::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto v = find(key);
  return v ? parse_double(key, *v) : fallback;
}

double RunConfig::get_probability(const std::string& key, double fallback) const {
  const double p = get_double(key, fallback);
  if (p < 0.0 || p > 1.0) {
    throw ValidationError("config key '" + key + "': probability must lie in [0, 1]");
  }
  return p;
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), value);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ValidationError("config key '" + key + "': expected an integer, got '" + *v + "'");
  }
  return value;
}

std::vector<double> RunConfig::get_doubles(const std::string& key,
                                           const std::vector<double>& fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::istringstream in(*v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ValidationError("config key '" + key + "': empty list");
  return out;
}

void RunConfig::reject_unknown(const std::vector<std::string>& allowed,
                               const std::vector<std::string>& allowed_prefixes) const {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : entries_) {
    const bool listed = std::find(allowed.begin(), allowed.end(), key) != allowed.end();
    const bool prefixed = std::any_of(allowed_prefixes.begin(), allowed_prefixes.end(),
                                      [&](const std::string& p) { return key.rfind(p, 0) == 0; });
    if (!listed && !prefixed) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config key(s):";
    for (const auto& k : unknown) msg += " " + k;
    throw ValidationError(msg);
  }
}

}  // namespace puf::cli
