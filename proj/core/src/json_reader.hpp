#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>

#include <json.hpp>

#include "crosscheck/errors.hpp"
#include "crosscheck/geometry.hpp"

namespace crosscheck::detail {

// Strict accessor over a JSON object: tracks which keys were consumed and
// errors on extras, so config typos fail loudly instead of being ignored.
class ObjectReader {
public:
  ObjectReader(const nlohmann::json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) throw ConfigError(ctx_ + ": expected a JSON object");
  }

  const nlohmann::json& required(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(ctx_ + ": missing field '" + key + "'");
    return *it;
  }

  const nlohmann::json* optional(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const char* key) { return as_number(required(key), key); }

  double number_or(const char* key, double def) {
    const nlohmann::json* v = optional(key);
    return v ? as_number(*v, key) : def;
  }

  std::int64_t integer(const char* key) {
    const nlohmann::json& v = required(key);
    if (!v.is_number_integer()) throw ConfigError(ctx_ + ": field '" + key + "' must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t uinteger_or(const char* key, std::uint64_t def) {
    const nlohmann::json* v = optional(key);
    if (!v) return def;
    if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0))
      throw ConfigError(ctx_ + ": field '" + key + "' must be a non-negative integer");
    return v->get<std::uint64_t>();
  }

  std::string string(const char* key) {
    const nlohmann::json& v = required(key);
    if (!v.is_string()) throw ConfigError(ctx_ + ": field '" + key + "' must be a string");
    return v.get<std::string>();
  }

  bool boolean_or(const char* key, bool def) {
    const nlohmann::json* v = optional(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(ctx_ + ": field '" + key + "' must be a boolean");
    return v->get<bool>();
  }

  Vec2 point(const char* key) {
    const nlohmann::json& v = required(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(ctx_ + ": field '" + key + "' must be [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
  }

  Rect rect(const char* key) {
    const nlohmann::json& v = required(key);
    if (!v.is_array() || v.size() != 4)
      throw ConfigError(ctx_ + ": field '" + key + "' must be [x1, y1, x2, y2]");
    for (const auto& e : v)
      if (!e.is_number()) throw ConfigError(ctx_ + ": field '" + key + "' must be numeric");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
  }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key()))
        throw ConfigError(ctx_ + ": unknown field '" + it.key() + "'");
    }
  }

  const std::string& context() const { return ctx_; }

private:
  double as_number(const nlohmann::json& v, const char* key) {
    if (!v.is_number()) throw ConfigError(ctx_ + ": field '" + key + "' must be a number");
    return v.get<double>();
  }

  const nlohmann::json& j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

inline const nlohmann::json& array_field(ObjectReader& r, const char* key) {
  const nlohmann::json& v = r.required(key);
  if (!v.is_array()) throw ConfigError(r.context() + ": field '" + key + "' must be an array");
  return v;
}

} // namespace crosscheck::detail
