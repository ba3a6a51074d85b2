#pragma once

#include <stdexcept>
#include <string>

namespace radjudge {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A completion failed semantic validation. The gateway treats these as
/// retryable: the request is re-issued until the retry budget is exhausted.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace radjudge
