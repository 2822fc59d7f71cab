#include "attfuse/config.hpp"

#include <fstream>
#include <sstream>

namespace attfuse {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_text(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    c.sections_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return from_text(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get_str(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_str(section, key, "");
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw ConfigError("config [" + section + "] " + key + ": bad number '" + v + "'");
  }
}

int Config::get_int(const std::string& section, const std::string& key,
                    int fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_str(section, key, "");
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw ConfigError("config [" + section + "] " + key + ": bad integer '" + v + "'");
  }
}

Vec3 Config::get_vec3(const std::string& section, const std::string& key,
                      const Vec3& fallback) const {
  if (!has(section, key)) return fallback;
  const std::vector<double> v = get_list(section, key);
  if (v.size() != 3)
    throw ConfigError("config [" + section + "] " + key + ": expected 3 values");
  return {v[0], v[1], v[2]};
}

std::vector<double> Config::get_list(const std::string& section,
                                     const std::string& key) const {
  std::vector<double> out;
  std::istringstream ss(get_str(section, key, ""));
  double x;
  while (ss >> x) out.push_back(x);
  if (!ss.eof())
    throw ConfigError("config [" + section + "] " + key + ": bad numeric list");
  return out;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
  sections_[section][key] = value;
}

}  // namespace attfuse
