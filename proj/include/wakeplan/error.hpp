#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wakeplan {

// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error { using Error::Error; };
class GeometryError : public Error { using Error::Error; };
class EmptyFieldError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class BlockedEdgeError : public Error { using Error::Error; };
class ProvenanceError : public Error { using Error::Error; };
class PathError : public Error { using Error::Error; };
class GenerationError : public Error { using Error::Error; };
class OverlongPathError : public Error { using Error::Error; };
class InputError : public Error { using Error::Error; };
class UndefinedLossError : public Error { using Error::Error; };
class ComparabilityError : public Error { using Error::Error; };

class NoPathError : public Error {
 public:
  NoPathError(const std::string& what, std::size_t expanded)
      : Error(what), expanded_(expanded) {}
  std::size_t expanded() const noexcept { return expanded_; }

 private:
  std::size_t expanded_;
};

// File-level failures. Each distinct failure mode has its own type.
class IoError : public Error { using Error::Error; };
class FormatError : public IoError { using IoError::IoError; };
class VersionError : public IoError { using IoError::IoError; };
class TruncatedError : public IoError { using IoError::IoError; };
class ChecksumError : public IoError { using IoError::IoError; };

}  // namespace wakeplan
