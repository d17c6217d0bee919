#pragma once

// Flat `key = value` text files. Blank lines and lines starting with '#' are ignored.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bubble {

struct KeyValueLine {
  int line_number = 0;
  std::string key;
  std::string value;
};

class KeyValueFile {
 public:
  /// Lines that are not `key=value` pairs are returned through `other` when given,
  /// otherwise they raise ConfigError.
  static KeyValueFile parse(std::string_view text, std::vector<KeyValueLine>* other = nullptr);
  static KeyValueFile load(const std::string& path, std::vector<KeyValueLine>* other = nullptr);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  /// Throws ConfigError naming any key not in `known`.
  void reject_unknown(const std::set<std::string>& known) const;

 private:
  std::map<std::string, KeyValueLine> values_;
};

std::string trim(std::string_view s);
double parse_double(std::string_view s, const std::string& what);

}  // namespace bubble
