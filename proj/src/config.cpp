#include "tentlab/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tentlab/error.hpp"
#include "tentlab/format.hpp"
#include "tentlab/parallel.hpp"

namespace tentlab {

namespace {

enum class Kind { real, integer, text };

struct KeySpec {
  const char* key;
  Kind kind;
  double lo;  // inclusive
  double hi;  // inclusive
  bool lo_open;
  const char* fallback;  // empty: computed default
};

// `samples = 0` selects each subcommand's own sample count.
constexpr KeySpec kKeys[] = {
    {"bins", Kind::integer, 2, 4194304, false, "4096"},
    {"burnin", Kind::integer, 0, 1e12, false, "1000"},
    {"depth", Kind::integer, 1, 62, false, "12"},
    {"eps", Kind::real, 0, 1e6, true, "0.01"},
    {"kmax", Kind::integer, 1, 50, false, "10"},
    {"kmin", Kind::integer, 1, 50, false, "3"},
    {"maxiter", Kind::integer, 1, 1e9, false, "100000"},
    {"orbit", Kind::integer, 1000, 1e12, false, "1000000"},
    {"out_dir", Kind::text, 0, 0, false, "."},
    {"reference_orbit", Kind::integer, 1000, 1e12, false, "10000000"},
    {"samples", Kind::integer, 0, 1e9, false, "0"},
    {"seed", Kind::integer, 0, 1.8e19, false, "1"},
    {"tol", Kind::real, 0, 1, true, "1e-10"},
    {"tstar", Kind::real, 1, 2, true, "1.8"},
    {"workers", Kind::integer, 1, 4096, false, ""},
};

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : kKeys) {
    if (key == k.key) return &k;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config() {
  for (const auto& k : kKeys) values_[k.key] = k.fallback;
  values_["workers"] = std::to_string(default_workers());
}

bool Config::known(const std::string& key) const { return find_key(key) != nullptr; }

std::vector<std::string> Config::keys() {
  std::vector<std::string> out;
  for (const auto& k : kKeys) out.emplace_back(k.key);
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ParseError("unknown config key '" + key + "'");
  const std::string v = trim(value);
  if (spec->kind == Kind::text) {
    if (v.empty()) throw ParseError("config key '" + key + "' needs a value");
    values_[key] = v;
    return;
  }
  double num = 0.0;
  try {
    num = parse_double(v);
  } catch (const ParseError&) {
    throw ParseError("config key '" + key + "': not a number: '" + v + "'");
  }
  if (spec->kind == Kind::integer && num != std::floor(num)) {
    throw ParseError("config key '" + key + "' must be an integer, got '" + v + "'");
  }
  const bool below = spec->lo_open ? !(num > spec->lo) : !(num >= spec->lo);
  if (below || !(num <= spec->hi)) {
    throw ParseError("config key '" + key + "' out of range: " + v);
  }
  values_[key] = v;
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ParseError("unknown config key '" + key + "'");
  return it->second;
}

double Config::real(const std::string& key) const { return parse_double(raw(key)); }

std::int64_t Config::integer(const std::string& key) const { return static_cast<std::int64_t>(real(key)); }

std::uint64_t Config::seed() const {
  const std::string& v = raw("seed");
  try {
    return std::stoull(v);
  } catch (...) {
    return static_cast<std::uint64_t>(real("seed"));
  }
}

std::size_t Config::workers() const { return static_cast<std::size_t>(integer("workers")); }

std::vector<std::string> Config::describe() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k + "=" + v);
  return out;
}

Config parse_config(const std::string& text, Config base) {
  std::istringstream is(text);
  std::string raw_line;
  int lineno = 0;
  while (std::getline(is, raw_line)) {
    ++lineno;
    const std::string line = trim(raw_line.substr(0, raw_line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": missing key");
    try {
      base.set(key, line.substr(eq + 1));
    } catch (const ParseError& e) {
      throw ParseError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

Config load_config(const std::string& path, Config base) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

}  // namespace tentlab
