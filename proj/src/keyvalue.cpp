#include "bubble/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bubble/common.hpp"

namespace bubble {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view s, const std::string& what) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError("invalid number '" + t + "' for " + what);
  return v;
}

KeyValueFile KeyValueFile::parse(std::string_view text, std::vector<KeyValueLine>* other) {
  KeyValueFile f;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      if (!other) throw ConfigError("line " + std::to_string(n) + ": expected key=value");
      other->push_back({n, t, {}});
      continue;
    }
    KeyValueLine kv{n, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1))};
    if (kv.key.empty()) throw ConfigError("line " + std::to_string(n) + ": empty key");
    if (f.values_.count(kv.key)) throw ConfigError("line " + std::to_string(n) + ": duplicate key " + kv.key);
    f.values_[kv.key] = kv;
  }
  return f;
}

KeyValueFile KeyValueFile::load(const std::string& path, std::vector<KeyValueLine>* other) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), other);
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second.value;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return parse_double(it->second.value, key + " (line " + std::to_string(it->second.line_number) + ")");
}

long KeyValueFile::get_int(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& t = it->second.value;
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError("invalid integer '" + t + "' for " + key);
  return v;
}

void KeyValueFile::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [k, kv] : values_)
    if (!known.count(k)) throw ConfigError("line " + std::to_string(kv.line_number) + ": unknown key " + k);
}

}  // namespace bubble
