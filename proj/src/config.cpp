#include "pvlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace pvlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  cfg.text_ = text;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(lineno, "empty section name");
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(lineno, "expected key = value, got: " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(lineno, "empty key");
    if (section.empty()) throw ConfigError(lineno, "key outside any [section]");
    auto [it, fresh] = cfg.sections_[section].emplace(key, Entry{value, lineno, false});
    (void)it;
    if (!fresh) throw ConfigError(lineno, "duplicate key '" + key + "'");
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse(os.str());
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::optional<std::string> KeyValueConfig::get(const std::string& section,
                                               const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  k->second.consumed = true;
  return k->second.value;
}

std::string KeyValueConfig::get_or(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& section, const std::string& key,
                                  double fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config: [" + section + "] " + key +
                             " is not a number: " + *v);
  }
}

long KeyValueConfig::get_int(const std::string& section, const std::string& key,
                             long fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const long d = std::stol(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config: [" + section + "] " + key +
                             " is not an integer: " + *v);
  }
}

bool KeyValueConfig::get_bool(const std::string& section, const std::string& key,
                              bool fallback) const {
  const auto v = get(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw std::runtime_error("config: [" + section + "] " + key +
                           " is not a boolean: " + *v);
}

std::vector<std::string> KeyValueConfig::unconsumed() const {
  std::vector<std::string> out;
  for (const auto& [sec, entries] : sections_) {
    for (const auto& [key, e] : entries) {
      if (!e.consumed) out.push_back("[" + sec + "] " + key);
    }
  }
  return out;
}

Descriptor Descriptor::parse(const std::string& text) {
  Descriptor d;
  std::istringstream is(text);
  std::string tok;
  if (!(is >> d.name)) throw std::runtime_error("empty descriptor");
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("descriptor '" + d.name + "': expected key=value, got '" +
                               tok + "'");
    }
    d.params[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return d;
}

std::optional<std::string> Descriptor::param(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  return it->second;
}

double Descriptor::param_double(const std::string& key, double fallback) const {
  const auto v = param(key);
  if (!v) return fallback;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw std::runtime_error("descriptor '" + name + "': " + key +
                             " is not a number: " + *v);
  }
}

long Descriptor::param_int(const std::string& key, long fallback) const {
  const auto v = param(key);
  if (!v) return fallback;
  try {
    return std::stol(*v);
  } catch (const std::exception&) {
    throw std::runtime_error("descriptor '" + name + "': " + key +
                             " is not an integer: " + *v);
  }
}

}  // namespace pvlab
