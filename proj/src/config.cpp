#include "remsim/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace remsim {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_num(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError("not a number: " + where + " = '" + text + "'");
  return v;
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("bad section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("empty section name at line " + std::to_string(lineno));
      cfg.data_[section];  // a section may legitimately stay empty
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || section.empty())
      throw ConfigError("key outside section or empty key at line " +
                        std::to_string(lineno));
    cfg.data_[section][key].push_back(trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

const std::vector<std::string>* Config::find(const std::string& sec,
                                             const std::string& key) const {
  consumed_.insert(sec + "\x1f" + key);
  const auto s = data_.find(sec);
  if (s == data_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool Config::has(const std::string& sec, const std::string& key) const {
  return find(sec, key) != nullptr;
}

double Config::num(const std::string& sec, const std::string& key) const {
  const auto* v = find(sec, key);
  if (!v) throw ConfigError("missing key: " + sec + "." + key);
  return parse_num(v->back(), sec + "." + key);
}

double Config::num(const std::string& sec, const std::string& key,
                   double fallback) const {
  const auto* v = find(sec, key);
  return v ? parse_num(v->back(), sec + "." + key) : fallback;
}

long long Config::integer(const std::string& sec, const std::string& key) const {
  const double v = num(sec, key);
  const auto i = static_cast<long long>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("not an integer: " + sec + "." + key);
  return i;
}

long long Config::integer(const std::string& sec, const std::string& key,
                          long long fallback) const {
  return has(sec, key) ? integer(sec, key) : fallback;
}

bool Config::boolean(const std::string& sec, const std::string& key,
                     bool fallback) const {
  const auto* v = find(sec, key);
  if (!v) return fallback;
  const std::string t = trim(v->back());
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("not a boolean: " + sec + "." + key + " = '" + t + "'");
}

std::string Config::str(const std::string& sec, const std::string& key,
                        const std::string& fallback) const {
  const auto* v = find(sec, key);
  return v ? v->back() : fallback;
}

std::vector<std::vector<std::string>> Config::rows(const std::string& sec,
                                                   const std::string& key) const {
  std::vector<std::vector<std::string>> out;
  const auto* v = find(sec, key);
  if (!v) return out;
  for (const auto& occurrence : *v) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(occurrence);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    out.push_back(std::move(cells));
  }
  return out;
}

std::vector<std::vector<double>> Config::num_rows(const std::string& sec,
                                                  const std::string& key) const {
  std::vector<std::vector<double>> out;
  for (const auto& row : rows(sec, key)) {
    std::vector<double> nums;
    nums.reserve(row.size());
    for (const auto& cell : row) nums.push_back(parse_num(cell, sec + "." + key));
    out.push_back(std::move(nums));
  }
  return out;
}

void Config::set(const std::string& sec, const std::string& key,
                 const std::string& value) {
  data_[sec][key] = {value};
}

void Config::check_all_consumed() const {
  std::string unknown;
  for (const auto& [sec, keys] : data_)
    for (const auto& [key, vals] : keys)
      if (!consumed_.count(sec + "\x1f" + key))
        unknown += (unknown.empty() ? "" : ", ") + sec + "." + key;
  if (!unknown.empty()) throw ConfigError("unknown key: " + unknown);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [sec, keys] : data_) {
    out += "[" + sec + "]\n";
    for (const auto& [key, vals] : keys)
      for (const auto& v : vals) out += key + "=" + v + "\n";
  }
  return out;
}

std::string Config::digest() const {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace remsim
