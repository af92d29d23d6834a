#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace remsim {

// Sectioned key-value text:
//   [section]
//   key = value            # comment
//   rows = a, b, c         ; repeated keys accumulate as row lists
// Every key a module reads (with or without a default) is marked consumed;
// check_all_consumed() then rejects anything left over, so typos in config
// files fail loudly with their section path.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& sec, const std::string& key) const;

  double num(const std::string& sec, const std::string& key) const;
  double num(const std::string& sec, const std::string& key, double fallback) const;
  long long integer(const std::string& sec, const std::string& key) const;
  long long integer(const std::string& sec, const std::string& key,
                    long long fallback) const;
  bool boolean(const std::string& sec, const std::string& key, bool fallback) const;
  std::string str(const std::string& sec, const std::string& key,
                  const std::string& fallback) const;

  // one entry per occurrence of the key, cells split on commas and trimmed
  std::vector<std::vector<std::string>> rows(const std::string& sec,
                                             const std::string& key) const;
  std::vector<std::vector<double>> num_rows(const std::string& sec,
                                            const std::string& key) const;

  void set(const std::string& sec, const std::string& key, const std::string& value);

  void check_all_consumed() const;

  // canonical dump: sections and keys sorted, occurrence order kept per key
  std::string canonical() const;
  std::string digest() const;  // FNV-1a 64 of canonical(), hex

 private:
  const std::vector<std::string>* find(const std::string& sec,
                                       const std::string& key) const;
  std::map<std::string, std::map<std::string, std::vector<std::string>>> data_;
  mutable std::set<std::string> consumed_;
};

}  // namespace remsim
