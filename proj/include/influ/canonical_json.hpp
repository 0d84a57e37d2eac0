#pragma once

#include <string>

#include <json.hpp>

namespace influ {

// Serializes JSON with lexicographically sorted object keys and numbers in
// plain decimal notation (never exponent form). Floating-point values always
// keep a fractional part, so the integer/float distinction survives a
// parse/serialize cycle byte-for-byte.
std::string canonical_dump(const nlohmann::json& value);

}  // namespace influ
