#pragma once

#include <stdexcept>
#include <string>

namespace influ {

// Malformed input files or wire payloads.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Logically invalid data: integrity violations, unknown keys, degenerate inputs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metadata source is unreachable, refused us, or gave up after retries.
class SourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace influ
