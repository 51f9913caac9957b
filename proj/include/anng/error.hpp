#pragma once

#include <stdexcept>
#include <string>

namespace anng {

// Bad parameters or malformed input; the CLI maps these to exit code 2.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A parameter is outside the domain of a closed-form expression.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wrong magic, unsupported version or truncated payload.
class format_error : public io_error {
 public:
  using io_error::io_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw validation_error(what);
}

inline void require_domain(bool ok, const std::string& what) {
  if (!ok) throw domain_error(what);
}

}  // namespace detail
}  // namespace anng
