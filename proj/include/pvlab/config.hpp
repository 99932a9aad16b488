#ifndef PVLAB_CONFIG_HPP
#define PVLAB_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvlab/util.hpp"

namespace pvlab {

/// Config file problem with the offending line number.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

/// Flat key = value text with [section] headers. `#` starts a comment, keys
/// are unique per section, values keep internal spaces.
class KeyValueConfig {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };

  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section,
                                 const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long get_int(const std::string& section, const std::string& key,
               long fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;

  /// Entries never read through the accessors; validate() reports them.
  std::vector<std::string> unconsumed() const;

  const std::string& text() const { return text_; }
  std::uint64_t checksum() const { return fnv1a64(text_); }

 private:
  std::string text_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// "word key=value key=value" descriptor, e.g. "riesz m=1 i=1".
struct Descriptor {
  std::string name;
  std::map<std::string, std::string> params;

  static Descriptor parse(const std::string& text);
  double param_double(const std::string& key, double fallback) const;
  long param_int(const std::string& key, long fallback) const;
  std::optional<std::string> param(const std::string& key) const;
};

}  // namespace pvlab

#endif
