#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace si {

enum class ErrorKind {
  MalformedRecord,
  NonMonotonicTime,
  MissingFinalMarker,
  IndexGap,
  InvalidConfig,
  EmptyCorpus,
  NoPrediction,
  OutOfOrderToken,
  EmptyEmission,
  NoReference,
  Io,
  Fixture,
};

const char* to_string(ErrorKind kind);

// Base error for every failure the library reports. `line` is 1-based when
// the error is tied to an input line, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::size_t line_;
};

}  // namespace si
