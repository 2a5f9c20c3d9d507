#include "csdial/remote_backend.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

namespace csdial {

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http")
    throw Error(ErrorKind::kUsage, "remote endpoint must be an http:// URL, got '" + url + "'");
  auto path_start = url.find('/', scheme_end + 3);
  base_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (base_.size() <= scheme_end + 3) throw Error(ErrorKind::kUsage, "remote endpoint has no host: '" + url + "'");
}

std::string RemoteBackend::parse_reply(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kProtocol, std::string("reply is not JSON: ") + e.what());
  }
  try {
    if (j.contains("text")) return j.at("text").get<std::string>();
    const auto& choice = j.at("choices").at(0);
    if (choice.contains("text")) return choice.at("text").get<std::string>();
    return choice.at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kProtocol, std::string("reply has no generated text: ") + e.what());
  }
}

std::string RemoteBackend::generate(const GenerationRequest& request) {
  httplib::Client client(base_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  nlohmann::json body = {
      {"model", request.model_ref},
      {"prompt", request.prompt},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
      {"top_p", request.top_p},
      {"frequency_penalty", request.frequency_penalty},
      {"presence_penalty", request.presence_penalty},
  };
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw TransientError("request to " + base_ + path_ + " failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransientError("endpoint returned HTTP " + std::to_string(res->status));
  if (res->status < 200 || res->status >= 300)
    throw Error(ErrorKind::kBackendUnavailable, "endpoint returned HTTP " + std::to_string(res->status));
  return parse_reply(res->body);
}

}  // namespace csdial
