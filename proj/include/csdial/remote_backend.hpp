#pragma once

#include <chrono>
#include <string>

#include "csdial/llm_gateway.hpp"

namespace csdial {

struct RemoteBackendConfig {
  // http://host[:port]/path of a completion endpoint.
  std::string endpoint;
  std::string token;
  std::chrono::seconds timeout{60};
};

// Speaks a minimal completion protocol: POST a JSON body with the prompt,
// model and sampling parameters; the reply carries the generated text as
// {"text": ...}, {"choices": [{"text": ...}]} or
// {"choices": [{"message": {"content": ...}}]}.
//
// Connection failures, 429 and 5xx raise TransientError; other non-2xx codes
// raise kBackendUnavailable; unparseable replies raise kProtocol.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteBackendConfig config);

  std::string id() const override { return "remote:" + base_ + path_; }
  std::string generate(const GenerationRequest& request) override;

  // Exposed for tests of reply handling.
  static std::string parse_reply(const std::string& body);

 private:
  RemoteBackendConfig config_;
  std::string base_;  // scheme://host:port
  std::string path_;
};

}  // namespace csdial
