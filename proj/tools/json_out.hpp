#pragma once

// JSON emission with every floating-point number written to 17 significant
// digits. Non-finite values become null.

#include <cmath>
#include <ostream>
#include <string>

#include <json.hpp>

#include "cscs/csv.hpp"

namespace cscs::cli {

using Json = nlohmann::ordered_json;

inline void write_json(std::ostream& out, const Json& v, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner(static_cast<std::size_t>(indent + 2), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << inner << Json(it.key()).dump() << ": ";
        write_json(out, it.value(), indent + 2);
      }
      out << '\n' << pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : v) flat = flat && !e.is_structured();
      out << '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out << (flat ? ", " : ",");
        first = false;
        if (!flat) out << '\n' << inner;
        write_json(out, e, indent + 2);
      }
      if (!flat) out << '\n' << pad;
      out << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (std::isfinite(d)) out << format_double(d);
      else out << "null";
      return;
    }
    default:
      out << v.dump();
  }
}

inline std::string to_json_text(const Json& v) {
  std::ostringstream s;
  write_json(s, v);
  s << '\n';
  return s.str();
}

}  // namespace cscs::cli
