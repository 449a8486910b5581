#include "flowlab/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "flowlab/errors.hpp"

namespace flowlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

} // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    cfg.entries[key] = value;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [key, value] : entries) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : serialize()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

bool Config::has(const std::string& key) const { return entries.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) { entries[key] = value; }

std::string Config::get_string(const std::string& key) const {
  const auto it = entries.find(key);
  if (it == entries.end()) throw ConfigError("config: missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second;
}

namespace {

double parse_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "inf" || v == "+inf" || v == "infinity")
    return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + raw + "'");
  }
  if (used != v.size())
    throw ConfigError("config key '" + key + "': trailing characters in '" + raw + "'");
  return out;
}

long long parse_int(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + raw + "'");
  }
  if (used != v.size())
    throw ConfigError("config key '" + key + "': trailing characters in '" + raw + "'");
  return out;
}

} // namespace

double Config::get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries.find(key);
  return it == entries.end() ? fallback : parse_double(key, it->second);
}

long long Config::get_int(const std::string& key) const { return parse_int(key, get_string(key)); }

long long Config::get_int(const std::string& key, long long fallback) const {
  const auto it = entries.find(key);
  return it == entries.end() ? fallback : parse_int(key, it->second);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries.find(key);
  if (it == entries.end()) return fallback;
  const std::string v = trim(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + it->second + "'");
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::string& fallback) const {
  const std::string raw = get_string(key, fallback);
  std::vector<double> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    const std::string v = trim(item);
    if (v.empty()) continue;
    out.push_back(parse_double(key, v));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': expected a list of numbers");
  return out;
}

} // namespace flowlab
