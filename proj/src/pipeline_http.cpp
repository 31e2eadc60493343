#include <stdexcept>

#include "httplib.h"
#include "json.hpp"
#include "journey/pipeline.hpp"

namespace journey {

using nlohmann::json;

HttpDepthEstimator::HttpDepthEstimator(std::string endpoint,
                                       double timeout_seconds)
    : endpoint_(std::move(endpoint)), timeout_seconds_(timeout_seconds) {
  if (endpoint_.find("://") == std::string::npos)
    throw std::invalid_argument("depth endpoint is not a URL: " + endpoint_);
}

DepthMap HttpDepthEstimator::estimate(const Image& image) {
  const size_t slash = endpoint_.find('/', endpoint_.find("://") + 3);
  const std::string base =
      slash == std::string::npos ? endpoint_ : endpoint_.substr(0, slash);
  const std::string path =
      slash == std::string::npos ? "/estimate" : endpoint_.substr(slash);

  json body = {{"height", image.height},
               {"width", image.width},
               {"channels", image.channels},
               {"image", image.data}};

  httplib::Client client(base);
  client.set_connection_timeout(static_cast<time_t>(timeout_seconds_));
  client.set_read_timeout(static_cast<time_t>(timeout_seconds_));
  const auto res = client.Post(path, body.dump(), "application/json");
  if (!res)
    throw std::runtime_error("depth endpoint unreachable: " + endpoint_);
  if (res->status != 200)
    throw std::runtime_error("depth endpoint returned status " +
                             std::to_string(res->status));

  const json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("depth"))
    throw std::runtime_error("depth endpoint reply lacks 'depth'");
  const auto values = reply.at("depth").get<std::vector<double>>();
  if (values.size() != static_cast<size_t>(image.height) * image.width)
    throw std::runtime_error("depth endpoint returned " +
                             std::to_string(values.size()) +
                             " values, expected " +
                             std::to_string(image.height * image.width));
  DepthMap out(image.height, image.width);
  out.data = values;
  out.validate();
  return out;
}

}  // namespace journey
