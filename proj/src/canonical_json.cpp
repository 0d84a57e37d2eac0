#include "influ/canonical_json.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>

#include "influ/common.hpp"

namespace influ {
namespace {

void append_number(char* buf, char* end, std::string& out) {
  out.append(buf, end);
}

void dump_value(const nlohmann::json& v, std::string& out) {
  using value_t = nlohmann::json::value_t;
  switch (v.type()) {
    case value_t::object: {
      // nlohmann objects iterate in key-sorted order already (std::map).
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(it.key()).dump();
        out += ':';
        dump_value(it.value(), out);
      }
      out += '}';
      break;
    }
    case value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        dump_value(item, out);
      }
      out += ']';
      break;
    }
    case value_t::string:
      out += v.dump();
      break;
    case value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case value_t::number_integer: {
      char buf[24];
      auto r = std::to_chars(buf, buf + sizeof buf, v.get<int64_t>());
      append_number(buf, r.ptr, out);
      break;
    }
    case value_t::number_unsigned: {
      char buf[24];
      auto r = std::to_chars(buf, buf + sizeof buf, v.get<uint64_t>());
      append_number(buf, r.ptr, out);
      break;
    }
    case value_t::number_float: {
      double d = v.get<double>();
      if (!std::isfinite(d)) throw DataError("non-finite number cannot be serialized");
      // Shortest fixed-notation representation that round-trips.
      char buf[384];
      auto r = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::fixed);
      std::string s(buf, r.ptr);
      if (s.find('.') == std::string::npos) s += ".0";
      out += s;
      break;
    }
    case value_t::null:
      out += "null";
      break;
    default:
      throw DataError("unsupported JSON value type");
  }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& value) {
  std::string out;
  dump_value(value, out);
  return out;
}

}  // namespace influ
