#include <cstdlib>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "journey/agent.hpp"

namespace journey {

namespace {

using nlohmann::json;

std::string base64_encode(const std::string& bytes) {
  static const char* tbl =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 2 < bytes.size()) {
    const uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                       (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                       static_cast<unsigned char>(bytes[i + 2]);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += tbl[v & 63];
    i += 3;
  }
  if (i < bytes.size()) {
    uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
    const bool two = i + 1 < bytes.size();
    if (two) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += two ? tbl[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_endpoint(const std::string& endpoint) {
  const size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos)
    throw AgentError(AgentError::Kind::transport,
                     "agent endpoint is not a URL: " + endpoint);
  const size_t slash = endpoint.find('/', scheme + 3);
  SplitUrl out;
  if (slash == std::string::npos) {
    out.base = endpoint;
    out.path = "/v1/chat/completions";
  } else {
    out.base = endpoint.substr(0, slash);
    out.path = endpoint.substr(slash);
  }
  return out;
}

}  // namespace

HttpAgent::HttpAgent(HttpAgentConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty())
    if (const char* env = std::getenv("JOURNEY_AGENT_ENDPOINT"))
      config_.endpoint = env;
  if (config_.api_key.empty())
    if (const char* env = std::getenv("JOURNEY_AGENT_TOKEN"))
      config_.api_key = env;
  if (config_.endpoint.empty())
    throw AgentError(AgentError::Kind::transport,
                     "agent endpoint not configured (config or "
                     "JOURNEY_AGENT_ENDPOINT)");
}

std::vector<std::string> HttpAgent::drain_warnings() {
  std::vector<std::string> out;
  out.swap(warnings_);
  return out;
}

std::string HttpAgent::complete(const std::vector<ChatMessage>& messages,
                                const std::optional<std::string>& image_ref) {
  json body;
  body["model"] = config_.model;
  body["messages"] = json::array();
  for (size_t i = 0; i < messages.size(); ++i) {
    const ChatMessage& m = messages[i];
    const bool attach = image_ref && config_.supports_vision &&
                        i + 1 == messages.size();
    if (!attach) {
      body["messages"].push_back({{"role", m.role}, {"content", m.text}});
      continue;
    }
    std::ifstream in(*image_ref, std::ios::binary);
    if (!in) {
      warnings_.push_back("image reference not readable, sent text only: " +
                          *image_ref);
      body["messages"].push_back({{"role", m.role}, {"content", m.text}});
      continue;
    }
    std::ostringstream bytes;
    bytes << in.rdbuf();
    json parts = json::array();
    parts.push_back({{"type", "text"}, {"text", m.text}});
    parts.push_back(
        {{"type", "image_url"},
         {"image_url",
          {{"url", "data:application/octet-stream;base64," +
                       base64_encode(bytes.str())}}}});
    body["messages"].push_back({{"role", m.role}, {"content", parts}});
  }
  if (image_ref && !config_.supports_vision)
    warnings_.push_back("backend has no vision support; image_ref dropped");

  const SplitUrl url = split_endpoint(config_.endpoint);
  httplib::Client client(url.base);
  client.set_connection_timeout(static_cast<time_t>(config_.timeout_seconds));
  client.set_read_timeout(static_cast<time_t>(config_.timeout_seconds));
  httplib::Headers headers;
  if (!config_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto res =
      client.Post(url.path, headers, body.dump(), "application/json");
  if (!res)
    throw AgentError(AgentError::Kind::transport,
                     "agent endpoint unreachable: " + config_.endpoint);
  if (res->status != 200)
    throw AgentError(AgentError::Kind::transport,
                     "agent endpoint returned status " +
                         std::to_string(res->status));

  const json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded())
    throw AgentError(AgentError::Kind::protocol,
                     "agent reply is not JSON: " + res->body);
  try {
    const json& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string joined;
      for (const json& part : content)
        if (part.contains("text")) joined += part["text"].get<std::string>();
      return joined;
    }
  } catch (const json::exception&) {
  }
  throw AgentError(AgentError::Kind::protocol,
                   "agent reply lacks choices[0].message.content");
}

}  // namespace journey
