#pragma once

#include <stdexcept>
#include <string>

namespace nhtopo {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the command-line front end reports for it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Bad arguments: invalid parameter names, out-of-range grid sizes, radii
/// below the pivot precondition.
class UsageError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// The requested quantity does not exist at these parameters (exceptional
/// point on a grid or loop, gapless input to a gapped-only invariant, ...).
class DomainError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

class UnsupportedModel : public UsageError {
 public:
  explicit UnsupportedModel(const std::string& id)
      : UsageError("unsupported model '" + id + "' (valid: ssh, chern)") {}
};

}  // namespace nhtopo
