#include "zoosel/canonical_json.hpp"

#include <cmath>
#include <cstdio>

#include "zoosel/error.hpp"

namespace zoosel {
namespace {

void write_string(std::string& out, const std::string& s) {
  // dump() on a string node gives correctly escaped UTF-8.
  out += Json(s).dump();
}

void write(std::string& out, const Json& v, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {  // std::map keeps keys sorted
        if (!first) out += ",\n";
        first = false;
        out += inner;
        write_string(out, it.key());
        out += ": ";
        write(out, it.value(), depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        write(out, v[i], depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_real(v.get<double>());
      return;
    case Json::value_t::string:
      write_string(out, v.get_ref<const std::string&>());
      return;
    default:
      out += v.dump();
  }
}

}  // namespace

std::string format_real(double value) {
  if (!std::isfinite(value)) throw Error("non-finite real in canonical output");
  if (value == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::string to_canonical(const Json& value) {
  std::string out;
  write(out, value, 0);
  out += '\n';
  return out;
}

Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

}  // namespace zoosel
