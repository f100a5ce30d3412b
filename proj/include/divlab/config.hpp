#pragma once

// Line-oriented configuration files:
//
//   # comment (also allowed inline, after the value)
//   [section]
//   key = value
//
// Keys live inside a named section; values are free text interpreted by the
// typed getters. Lists are comma- or whitespace-separated. Later duplicates
// of the same key win. Parse errors carry the file name and line number.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "divlab/common.hpp"

namespace divlab {

class ConfigFile {
public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigFile parse_text(const std::string& text, const std::string& origin);
  static ConfigFile parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;
  std::vector<std::string> keys(const std::string& section) const;

  std::string get_str(const std::string& section, const std::string& key,
                      const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long long get_int(const std::string& section, const std::string& key,
                    long long fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<std::string> get_strs(const std::string& section, const std::string& key,
                                    const std::vector<std::string>& fallback) const;

  const std::string& origin() const { return origin_; }

private:
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void bad_value(const std::string& section, const std::string& key,
                              const Entry& e, const std::string& want) const;

  std::string origin_;
  std::map<std::string, std::map<std::string, Entry>> data_;
};

}  // namespace divlab
