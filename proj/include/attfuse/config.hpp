#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attfuse/linalg.hpp"

namespace attfuse {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat INI-style configuration: [section] headers, key = value lines,
// '#' comments. No nesting.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_str(const std::string& section, const std::string& key,
                      const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  // Whitespace-separated triple.
  Vec3 get_vec3(const std::string& section, const std::string& key,
                const Vec3& fallback) const;
  // Whitespace-separated list of doubles.
  std::vector<double> get_list(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace attfuse
