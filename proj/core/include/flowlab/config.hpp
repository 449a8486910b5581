#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace flowlab {

// flat dotted-key configuration: one `key = value` per line, '#' comments.
// serialize() emits sorted keys, so equal configs hash equal.
struct Config {
  std::map<std::string, std::string> entries;

  static Config parse(const std::string& text);
  static Config load(const std::string& path);
  std::string serialize() const;
  std::uint64_t hash() const; // FNV-1a 64 over the serialized form

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // comma-separated doubles; the fallback string is parsed the same way
  std::vector<double> get_double_list(const std::string& key, const std::string& fallback) const;
};

} // namespace flowlab
