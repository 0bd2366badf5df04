#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace citeimpact {

// Base of every error the toolkit throws. kind() is a stable machine-readable
// tag used by the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format", message) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error("precondition", message) {}
};

class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& message)
      : Error("capability", message) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& message)
      : Error("integrity", message) {}
};

class VersionError : public Error {
 public:
  explicit VersionError(const std::string& message) : Error("version", message) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& message) : Error("training", message) {}
};

}  // namespace citeimpact
