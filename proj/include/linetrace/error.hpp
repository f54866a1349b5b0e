#pragma once

#include <stdexcept>
#include <string>

namespace linetrace {

enum class ErrorKind {
  kInvalidArgument,
  kParse,
  kIo,
  kNumeric,
  kDegenerate,
};

// Single exception type for the core library; the C API maps `kind` onto
// its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace linetrace
