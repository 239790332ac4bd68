#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tentlab {

/// Run configuration: a fixed set of keys, each range-checked when set.
/// Values layer as built-in defaults < config file < command-line flags.
class Config {
 public:
  Config();

  /// Throws ParseError naming the key for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  bool known(const std::string& key) const;
  static std::vector<std::string> keys();

  const std::string& raw(const std::string& key) const;
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t seed() const;
  std::size_t workers() const;
  const std::string& out_dir() const { return raw("out_dir"); }

  /// "key=value" for every key, in key order.
  std::vector<std::string> describe() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Parses `key = value` lines (with `#` comments) over the defaults in `base`.
/// Errors carry the line number, range errors the key name.
Config load_config(const std::string& path, Config base = Config());
Config parse_config(const std::string& text, Config base = Config());

}  // namespace tentlab
