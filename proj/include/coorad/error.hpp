#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coorad {

/// Base of every error raised by the library. `module()` names the
/// component that raised it so the CLI can report provenance.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Invalid input or configuration (CLI exit code 2).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Arguments outside the domain where a formula is defined.
class DomainError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

/// A computation that could not be completed on valid input (CLI exit code 3).
class ComputationError : public Error {
 public:
  using Error::Error;
};

/// Design matrix is rank deficient; carries the offending column names.
class RankError : public ComputationError {
 public:
  RankError(std::string module, const std::string& what, std::vector<std::string> columns)
      : ComputationError(std::move(module), what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

}  // namespace coorad
