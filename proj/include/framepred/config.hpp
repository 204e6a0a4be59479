#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "framepred/errors.hpp"

namespace framepred {

/// Flat key=value configuration with [section] headers; keys are stored as
/// "section.key" in first-appearance order. Parsing is strict: duplicate
/// keys, bare junk, and (at validation time) unknown keys are errors.
class Config {
 public:
  static Config parse_text(const std::string& text);
  static Config load_file(const std::string& path);

  /// Canonical emission: sections in first-appearance order, keys in
  /// insertion order. parse_text(emit()) reproduces the config exactly.
  std::string emit() const;

  bool has(const std::string& key) const { return map_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int_or(const std::string& key, int64_t fallback) const;
  double get_num(const std::string& key) const;
  double get_num_or(const std::string& key, double fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  void set_int(const std::string& key, int64_t value);
  void set_num(const std::string& key, double value);

  const std::vector<std::string>& keys() const { return order_; }

  /// Throws ConfigError naming the first key not present in `allowed`.
  void require_known(const std::vector<std::string>& allowed) const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::string> map_;
};

}  // namespace framepred
