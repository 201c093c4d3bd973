#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "metashock/core.hpp"

namespace metashock {

/// Flat `key = value` configuration grouped by `[section]` headers. `#` starts a comment.
/// Keys outside any section belong to the section "".
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>") {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(origin, lineno, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(origin, lineno, "empty section name");
        cfg.values_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (key.empty()) fail(origin, lineno, "missing key");
      auto& sec = cfg.values_[section];
      if (sec.count(key)) fail(origin, lineno, "duplicate key '" + key + "'");
      sec[key] = value;
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigParse, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  bool has(const std::string& section, const std::string& key) const {
    auto it = values_.find(section);
    return it != values_.end() && it->second.count(key);
  }
  bool has_section(const std::string& section) const { return values_.count(section) > 0; }

  std::string text(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw Error(ErrorKind::ConfigParse, "missing [" + section + "] " + key);
    return values_.at(section).at(key);
  }
  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? text(section, key) : fallback;
  }

  double number(const std::string& section, const std::string& key) const {
    return to_number(text(section, key), section, key);
  }
  double number(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
  }

  int integer(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = text(section, key);
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
      throw Error(ErrorKind::ConfigParse, "[" + section + "] " + key + ": not an integer: '" + v + "'");
    return out;
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = text(section, key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw Error(ErrorKind::ConfigParse, "[" + section + "] " + key + ": not a boolean: '" + v + "'");
  }

  /// Comma-separated list of numbers.
  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::string item;
    std::istringstream in(text(section, key));
    while (std::getline(in, item, ',')) out.push_back(to_number(trim(item), section, key));
    return out;
  }
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              std::vector<double> fallback) const {
    return has(section, key) ? numbers(section, key) : fallback;
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section][key] = value;
  }

  /// Rejects keys of `section` that are not listed in `known`.
  void require_known(const std::string& section, const std::set<std::string>& known) const {
    auto it = values_.find(section);
    if (it == values_.end()) return;
    for (const auto& [key, value] : it->second)
      if (!known.count(key)) throw Error(ErrorKind::ConfigParse, "unknown key [" + section + "] " + key);
  }

  const std::map<std::string, std::map<std::string, std::string>>& sections() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  [[noreturn]] static void fail(const std::string& origin, int line, const std::string& what) {
    std::ostringstream msg;
    msg << origin << ":" << line << ": " << what;
    throw Error(ErrorKind::ConfigParse, msg.str());
  }

  static double to_number(const std::string& v, const std::string& section, const std::string& key) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
      throw Error(ErrorKind::ConfigParse, "[" + section + "] " + key + ": not a number: '" + v + "'");
    return out;
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

namespace config_detail {

inline double parse_number(const std::string& v, const std::string& what) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw Error(ErrorKind::ConfigParse, what + ": not a number: '" + v + "'");
  return out;
}

}  // namespace config_detail

/// burgers | zero | cubic | linear:K | shifted_burgers:A, where the shifted flux is
/// (u + A sqrt(eps))^2/2 renormalized to vanish at 0.
inline Flux flux_from_string(const std::string& s, double epsilon) {
  const auto colon = s.find(':');
  const std::string name = s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
  auto need_arg = [&]() {
    if (arg.empty()) throw Error(ErrorKind::ConfigParse, "flux '" + name + "' needs a parameter");
    return config_detail::parse_number(arg, "flux parameter");
  };
  if (name == "burgers" && arg.empty()) return fluxes::burgers();
  if (name == "zero" && arg.empty()) return fluxes::zero();
  if (name == "cubic" && arg.empty()) return fluxes::cubic();
  if (name == "linear") return fluxes::linear(need_arg());
  if (name == "shifted_burgers") return fluxes::shifted_burgers(need_arg() * std::sqrt(epsilon));
  throw Error(ErrorKind::ConfigParse, "unknown flux '" + s + "'");
}

/// sqrt_eps | K*sqrt_eps | eps | K*eps | NUMBER
inline double u_star_from_string(const std::string& s, double epsilon) {
  const auto star = s.find('*');
  const std::string head = star == std::string::npos ? "" : s.substr(0, star);
  const std::string unit = star == std::string::npos ? s : s.substr(star + 1);
  const double k = head.empty() ? 1.0 : config_detail::parse_number(head, "u_star factor");
  if (unit == "sqrt_eps") return k * std::sqrt(epsilon);
  if (unit == "eps") return k * epsilon;
  if (!head.empty()) throw Error(ErrorKind::ConfigParse, "unknown u_star unit '" + unit + "'");
  return config_detail::parse_number(s, "u_star");
}

inline const std::set<std::string>& problem_keys() {
  static const std::set<std::string> keys{"epsilon", "ell", "flux", "u_star", "direction", "u_minus", "u_plus"};
  return keys;
}

/// Builds the [problem] section. Either u_star (with direction, default decreasing) or the
/// explicit pair u_minus/u_plus sets the boundary data.
inline ProblemSpec problem_from_config(const Config& cfg) {
  cfg.require_known("problem", problem_keys());
  const double eps = cfg.number("problem", "epsilon");
  const double ell = cfg.number("problem", "ell", 1.0);
  Flux flux = flux_from_string(cfg.text("problem", "flux", "burgers"), eps);
  const bool explicit_data = cfg.has("problem", "u_minus") || cfg.has("problem", "u_plus");
  if (explicit_data) {
    if (cfg.has("problem", "u_star"))
      throw Error(ErrorKind::ConfigParse, "give either u_star or u_minus/u_plus, not both");
    return ProblemSpec(eps, ell, cfg.number("problem", "u_minus"), cfg.number("problem", "u_plus"),
                       std::move(flux));
  }
  const double us = u_star_from_string(cfg.text("problem", "u_star", "sqrt_eps"), eps);
  const std::string dir = cfg.text("problem", "direction", "decreasing");
  if (dir != "decreasing" && dir != "increasing")
    throw Error(ErrorKind::ConfigParse, "direction must be 'decreasing' or 'increasing'");
  return ProblemSpec::symmetric(eps, ell, us, std::move(flux),
                                dir == "decreasing" ? Direction::decreasing : Direction::increasing);
}

}  // namespace metashock
