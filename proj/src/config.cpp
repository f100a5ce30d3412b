#include "divlab/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace divlab {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      return false;
  }
  return true;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : value) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

bool parse_double(const std::string& s, double* out) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) return false;
  *out = v;
  return true;
}

bool parse_ll(const std::string& s, long long* out) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) return false;
  *out = v;
  return true;
}

bool parse_ull(const std::string& s, unsigned long long* out) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) return false;
  *out = v;
  return true;
}

}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
  ConfigFile cf;
  cf.origin_ = origin;
  std::istringstream ss(text);
  std::string raw, section;
  int lineno = 0;
  while (std::getline(ss, raw)) {
    ++lineno;
    const size_t hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(ErrKind::parse,
             origin + ":" + fmt_i(lineno) + ": section header missing closing ']'");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section))
        fail(ErrKind::parse, origin + ":" + fmt_i(lineno) + ": invalid section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrKind::parse,
           origin + ":" + fmt_i(lineno) + ": expected 'key = value' or '[section]'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_name(key))
      fail(ErrKind::parse, origin + ":" + fmt_i(lineno) + ": invalid key name");
    if (section.empty())
      fail(ErrKind::parse,
           origin + ":" + fmt_i(lineno) + ": key appears before any [section] header");
    cf.data_[section][key] = Entry{value, lineno};
  }
  return cf;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrKind::data, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
  auto s = data_.find(section);
  if (s == data_.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::vector<std::string> ConfigFile::sections() const {
  std::vector<std::string> out;
  for (const auto& kv : data_) out.push_back(kv.first);
  return out;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto it = data_.find(section);
  if (it == data_.end()) return out;
  for (const auto& kv : it->second) out.push_back(kv.first);
  return out;
}

void ConfigFile::bad_value(const std::string& section, const std::string& key,
                           const Entry& e, const std::string& want) const {
  fail(ErrKind::schema, origin_ + ":" + fmt_i(e.line) + ": [" + section + "] " + key +
                            ": expected " + want + ", got '" + e.value + "'");
}

std::string ConfigFile::get_str(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_double(e->value, &v)) bad_value(section, key, *e, "a number");
  return v;
}

long long ConfigFile::get_int(const std::string& section, const std::string& key,
                              long long fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  long long v = 0;
  if (!parse_ll(e->value, &v)) bad_value(section, key, *e, "an integer");
  return v;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  unsigned long long v = 0;
  if (!parse_ull(e->value, &v)) bad_value(section, key, *e, "a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::string v;
  for (char c : e->value) v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  bad_value(section, key, *e, "a boolean");
}

std::vector<double> ConfigFile::get_doubles(const std::string& section,
                                            const std::string& key,
                                            const std::vector<double>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const std::string& p : split_list(e->value)) {
    double v = 0.0;
    if (!parse_double(p, &v)) bad_value(section, key, *e, "a list of numbers");
    out.push_back(v);
  }
  if (out.empty()) bad_value(section, key, *e, "a non-empty list of numbers");
  return out;
}

std::vector<std::string> ConfigFile::get_strs(
    const std::string& section, const std::string& key,
    const std::vector<std::string>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<std::string> out = split_list(e->value);
  if (out.empty()) bad_value(section, key, *e, "a non-empty list");
  return out;
}

}  // namespace divlab
