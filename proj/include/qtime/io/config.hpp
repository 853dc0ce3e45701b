#pragma once

// Strict JSON configuration reading. Every object tracks which keys were read;
// `finish()` rejects anything left over, so a typo is an error with its path.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "qtime/core/types.hpp"

namespace qtime::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Read-once view of a JSON object at a dotted path.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return j_->contains(key); }

  template <class T>
  T get(const std::string& key) {
    if (!has(key)) fail(child(key), "required field is missing");
    return convert<T>(key);
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  ObjectReader object(const std::string& key) {
    if (!has(key)) fail(child(key), "required field is missing");
    used_.insert(key);
    return ObjectReader(j_->at(key), child(key));
  }

  /// Raw node access for list-of-objects fields; marks the key as used.
  const json& node(const std::string& key) {
    if (!has(key)) fail(child(key), "required field is missing");
    used_.insert(key);
    return j_->at(key);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!used_.count(it.key())) fail(child(it.key()), "unknown key");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + what);
  }

 private:
  template <class T>
  T convert(const std::string& key) {
    used_.insert(key);
    const json& v = j_->at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) fail(child(key), "expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(child(key), "expected true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) fail(child(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned()) fail(child(key), "expected a non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(child(key), "expected a string");
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) fail(child(key), "expected an array of numbers");
        for (const auto& x : v)
          if (!x.is_number()) fail(child(key), "expected an array of numbers");
      } else if constexpr (std::is_same_v<T, std::vector<int>>) {
        if (!v.is_array()) fail(child(key), "expected an array of integers");
        for (const auto& x : v)
          if (!x.is_number_integer()) fail(child(key), "expected an array of integers");
      } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
        if (!v.is_array()) fail(child(key), "expected an array of strings");
        for (const auto& x : v)
          if (!x.is_string()) fail(child(key), "expected an array of strings");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      fail(child(key), e.what());
    }
  }

  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

/// Grid given either as an explicit list or as {start, stop, step} (inclusive
/// of stop within half a step). Generated points are rounded to 12 decimals.
inline std::vector<double> read_grid(ObjectReader& r, const std::string& key) {
  const json& v = r.node(key);
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) ObjectReader::fail(r.child(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
  } else {
    ObjectReader g(v, r.child(key));
    const double start = g.get<double>("start"), stop = g.get<double>("stop"), step = g.get<double>("step");
    g.finish();
    if (!(step > 0)) ObjectReader::fail(r.child(key) + ".step", "must be positive");
    if (stop < start) ObjectReader::fail(r.child(key) + ".stop", "must not be below start");
    const long count = long(std::floor((stop - start) / step + 0.5)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(std::round((start + double(i) * step) * 1e12) / 1e12);
  }
  if (out.empty()) ObjectReader::fail(r.child(key), "grid must not be empty");
  return out;
}

inline std::vector<int> read_int_grid(ObjectReader& r, const std::string& key) {
  const auto v = r.get<std::vector<int>>(key);
  if (v.empty()) ObjectReader::fail(r.child(key), "grid must not be empty");
  return v;
}

/// Reads and checks `schema_version` and `kind` on the root object.
inline void check_header(ObjectReader& root, const std::string& expected_kind) {
  const int version = root.get<int>("schema_version");
  if (version != kSchemaVersion) {
    ObjectReader::fail("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                             std::to_string(kSchemaVersion) + ")");
  }
  const auto kind = root.get<std::string>("kind");
  if (kind != expected_kind) ObjectReader::fail("kind", "config is for '" + kind + "', not '" + expected_kind + "'");
}

}  // namespace qtime::io
