#pragma once

// Terse builders for catalog entries.

#include "voxflow/engine/catalog.hpp"

namespace voxflow::engine::spec {

inline ParamSpec number(std::string n, Json def, std::optional<double> min = {}, std::optional<double> max = {},
                        bool exclusive_min = false, std::string doc = {}) {
  ParamSpec p{std::move(n), ParamKind::Number, std::move(def)};
  p.min = min;
  p.max = max;
  p.exclusive_min = exclusive_min;
  p.doc = std::move(doc);
  return p;
}

inline ParamSpec integer(std::string n, Json def, std::optional<double> min = {}, std::optional<double> max = {},
                         std::string doc = {}) {
  ParamSpec p{std::move(n), ParamKind::Integer, std::move(def)};
  p.min = min;
  p.max = max;
  p.doc = std::move(doc);
  return p;
}

inline ParamSpec boolean(std::string n, bool def, std::string doc = {}) {
  ParamSpec p{std::move(n), ParamKind::Bool, def};
  p.doc = std::move(doc);
  return p;
}

inline ParamSpec text(std::string n, Json def, std::string doc = {}) {
  ParamSpec p{std::move(n), ParamKind::String, std::move(def)};
  p.required = p.default_value.is_null();
  p.doc = std::move(doc);
  return p;
}

inline ParamSpec path(std::string n, std::string doc = {}) {
  ParamSpec p{std::move(n), ParamKind::Path, nullptr};
  p.required = true;
  p.doc = std::move(doc);
  return p;
}

inline ParamSpec choice(std::string n, std::vector<std::string> choices, std::string def, std::string doc = {}) {
  ParamSpec p{std::move(n), ParamKind::Enum, std::move(def)};
  p.choices = std::move(choices);
  p.doc = std::move(doc);
  return p;
}

inline ParamSpec numbers(std::string n, Json def, std::optional<double> min = {}, std::string doc = {}) {
  ParamSpec p{std::move(n), ParamKind::NumberList, std::move(def)};
  p.min = min;
  p.doc = std::move(doc);
  return p;
}

inline ParamSpec strings(std::string n, Json def, std::vector<std::string> choices = {}, std::string doc = {}) {
  ParamSpec p{std::move(n), ParamKind::StringList, std::move(def)};
  p.choices = std::move(choices);
  p.doc = std::move(doc);
  return p;
}

inline PortSpec port(std::string n, PortType t, bool required = true) { return {std::move(n), t, required}; }

} // namespace voxflow::engine::spec
