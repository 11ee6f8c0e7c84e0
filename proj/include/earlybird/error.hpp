#pragma once

#include <stdexcept>
#include <string>

namespace earlybird {

/// Base for all errors raised by the library. Callers that want to keep going
/// (the experiment runner) catch this and record the message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates an operation's precondition.
class DataError : public Error {
 public:
  using Error::Error;
};

/// The external git process failed or the path is not a repository.
class GitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace earlybird
