#include "adforge/remote_scorer.hpp"

#include <chrono>

#include "httplib.h"
#include "json.hpp"

namespace adforge::classifier {

using nlohmann::json;

namespace {

// Splits an endpoint URL into the httplib origin and the request path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ProtocolError("scorer endpoint must include a scheme: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

double remote_score(const RemoteScorerConfig& config, const std::string& query,
                    const std::string& response) {
  const auto [origin, path] = split_endpoint(config.endpoint);
  httplib::Client client(origin);
  client.set_connection_timeout(config.timeout_seconds, 0);
  client.set_read_timeout(config.timeout_seconds, 0);
  client.set_write_timeout(config.timeout_seconds, 0);

  const json body = {{"query", query}, {"response", response}};
  const auto started = std::chrono::steady_clock::now();
  auto result = client.Post(path, body.dump(), "application/json");
  if (!result) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    // Read/Write failures right at the deadline are timeouts in disguise.
    const bool deadline_passed =
        elapsed >= std::chrono::milliseconds(config.timeout_seconds * 1000LL - 50);
    const bool read_or_write =
        result.error() == httplib::Error::Read || result.error() == httplib::Error::Write;
    if (result.error() == httplib::Error::ConnectionTimeout || (read_or_write && deadline_passed)) {
      throw TimeoutError("scorer request exceeded " + std::to_string(config.timeout_seconds) +
                         "s: " + httplib::to_string(result.error()));
    }
    throw NetworkError("scorer request failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw ApiError(result->status, result->body);
  }

  json parsed;
  try {
    parsed = json::parse(result->body);
  } catch (const json::exception& err) {
    throw ProtocolError(std::string{"scorer reply is not JSON: "} + err.what());
  }
  if (!parsed.is_object() || !parsed.contains("probability") ||
      !parsed.at("probability").is_number()) {
    throw ProtocolError("scorer reply lacks a numeric \"probability\" field");
  }
  const double probability = parsed.at("probability").get<double>();
  if (probability < 0.0 || probability > 1.0) {
    throw ProtocolError("scorer probability out of range: " + std::to_string(probability));
  }
  return probability;
}

}  // namespace adforge::classifier
