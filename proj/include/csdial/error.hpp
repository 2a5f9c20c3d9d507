#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csdial {

enum class ErrorKind {
  kIngestion,
  kEmptyGraph,
  kRegistryMiss,
  kUnderfullHead,
  kCapacity,
  kPrecondition,
  kBackendUnavailable,
  kProtocol,
  kIo,
  kSynthesisReject,
  kInjectionFailure,
  kConflict,
  kInvariant,
  kValidation,
  kLease,
  kCardinality,
  kNotFound,
  kCoverage,
  kDomain,
  kInput,
  kUsage,
  kDependency,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (CLI exit
// codes, HTTP status mapping, python bindings) can dispatch without parsing
// messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown by build_corpus when the graph cannot produce the requested number
// of templates.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& message, std::size_t achieved)
      : Error(ErrorKind::kCapacity, message), achieved_(achieved) {}

  std::size_t achieved() const noexcept { return achieved_; }

 private:
  std::size_t achieved_;
};

}  // namespace csdial
