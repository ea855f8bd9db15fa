#pragma once

// Schema-checked access to JSON scenario files. Every read records the value
// (or its default) in an effective config; keys never read are rejected.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace circuitlab::io {

using Json = nlohmann::json;

/// Malformed config: wrong type, missing key, unknown key.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Section {
 public:
  Section(const Json& source, Json& effective, std::string path)
      : src_(&source), eff_(&effective), path_(std::move(path)) {
    if (!src_->is_object()) throw SchemaError(where() + "must be an object");
    if (!eff_->is_object()) *eff_ = Json::object();
  }

  bool has(const std::string& key) const { return src_->contains(key); }

  double number(const std::string& key, double fallback) { return read<double>(key, fallback, "a number"); }
  double number(const std::string& key) { return read<double>(key, std::nullopt, "a number"); }
  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    const Json* v = fetch(key);
    if (!v) return record(key, fallback);
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0)
      throw SchemaError(where(key) + "must be a non-negative integer");
    return record(key, v->get<std::uint64_t>());
  }
  bool flag(const std::string& key, bool fallback) { return read<bool>(key, fallback, "a boolean"); }
  std::string text(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed = {}) {
    auto s = read<std::string>(key, fallback, "a string");
    check_choice(key, s, allowed);
    return s;
  }
  std::string text(const std::string& key, const std::vector<std::string>& allowed = {}) {
    auto s = read<std::string>(key, std::nullopt, "a string");
    check_choice(key, s, allowed);
    return s;
  }
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
    const Json* v = fetch(key);
    if (!v) {
      if (!fallback) throw SchemaError(where(key) + "is required");
      record_json(key, Json(*fallback));
      return *fallback;
    }
    auto out = as_numbers(*v, key);
    record_json(key, *v);
    return out;
  }
  std::vector<std::vector<double>> matrix(const std::string& key,
                                          std::optional<std::vector<std::vector<double>>> fallback = std::nullopt) {
    const Json* v = fetch(key);
    if (!v) {
      if (!fallback) throw SchemaError(where(key) + "is required");
      record_json(key, Json(*fallback));
      return *fallback;
    }
    if (!v->is_array()) throw SchemaError(where(key) + "must be an array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& row : *v) out.push_back(as_numbers(row, key));
    record_json(key, *v);
    return out;
  }

  /// Nested object; absent means empty, so its own defaults apply.
  Section child(const std::string& key) {
    seen_.insert(key);
    static const Json empty = Json::object();
    const Json& s = has(key) ? (*src_)[key] : empty;
    Json& e = (*eff_)[key];
    return Section(s, e, path_.empty() ? key : path_ + "." + key);
  }
  /// Array of objects.
  std::vector<Section> children(const std::string& key) {
    const Json* v = fetch(key);
    if (!v) throw SchemaError(where(key) + "is required");
    if (!v->is_array()) throw SchemaError(where(key) + "must be an array of objects");
    Json& e = (*eff_)[key];
    e = Json::array();
    for (std::size_t k = 0; k < v->size(); ++k) e.push_back(Json::object());
    std::vector<Section> out;
    for (std::size_t k = 0; k < v->size(); ++k)
      out.emplace_back((*v)[k], e[k], (path_.empty() ? key : path_ + "." + key) + "[" + std::to_string(k) + "]");
    return out;
  }
  /// Raw value, copied into the effective config unchanged.
  const Json* raw(const std::string& key) {
    const Json* v = fetch(key);
    if (v) record_json(key, *v);
    return v;
  }

  /// Overwrites the effective value of `key` (command-line overrides, filled-in lists).
  void assign(const std::string& key, Json v) {
    seen_.insert(key);
    record_json(key, v);
  }

  /// Rejects keys that no read consumed.
  void finish() const {
    for (auto it = src_->begin(); it != src_->end(); ++it)
      if (!seen_.count(it.key())) throw SchemaError("unknown key '" + qualified(it.key()) + "'");
  }

  const std::string& path() const { return path_; }

 private:
  const Json* fetch(const std::string& key) {
    seen_.insert(key);
    return has(key) ? &(*src_)[key] : nullptr;
  }
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where(const std::string& key = "") const {
    const auto q = key.empty() ? path_ : qualified(key);
    return "config " + (q.empty() ? std::string("root") : "'" + q + "'") + " ";
  }

  template <class T>
  T read(const std::string& key, std::optional<T> fallback, const char* kind) {
    const Json* v = fetch(key);
    if (!v) {
      if (!fallback) throw SchemaError(where(key) + "is required");
      return record(key, *fallback);
    }
    bool ok;
    if constexpr (std::is_same_v<T, double>)
      ok = v->is_number();
    else if constexpr (std::is_same_v<T, bool>)
      ok = v->is_boolean();
    else
      ok = v->is_string();
    if (!ok) throw SchemaError(where(key) + "must be " + kind);
    return record(key, v->get<T>());
  }
  template <class T>
  T record(const std::string& key, T value) {
    (*eff_)[key] = value;
    return value;
  }
  void record_json(const std::string& key, const Json& v) { (*eff_)[key] = v; }
  std::vector<double> as_numbers(const Json& v, const std::string& key) const {
    if (!v.is_array()) throw SchemaError(where(key) + "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw SchemaError(where(key) + "must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  void check_choice(const std::string& key, const std::string& s, const std::vector<std::string>& allowed) const {
    if (allowed.empty()) return;
    for (const auto& a : allowed)
      if (a == s) return;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw SchemaError(where(key) + "must be one of {" + list + "}, got '" + s + "'");
  }

  const Json* src_;
  Json* eff_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(origin + ": invalid JSON: " + e.what());
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

}  // namespace circuitlab::io
