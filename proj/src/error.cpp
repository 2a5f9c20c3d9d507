#include "csdial/error.hpp"

namespace csdial {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIngestion: return "ingestion";
    case ErrorKind::kEmptyGraph: return "empty_graph";
    case ErrorKind::kRegistryMiss: return "registry_miss";
    case ErrorKind::kUnderfullHead: return "underfull_head";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kBackendUnavailable: return "backend_unavailable";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kSynthesisReject: return "synthesis_reject";
    case ErrorKind::kInjectionFailure: return "injection_failure";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kInvariant: return "invariant";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kLease: return "lease";
    case ErrorKind::kCardinality: return "cardinality";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kCoverage: return "coverage";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kDependency: return "dependency";
  }
  return "unknown";
}

}  // namespace csdial
