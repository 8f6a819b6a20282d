#include <chrono>
#include <cstdlib>
#include <future>

#include "adforge/generator.hpp"
#include "httplib.h"
#include "json.hpp"

namespace adforge::gen {

using nlohmann::json;

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // leading path prefix, possibly empty
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint URL must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  auto path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

void validate(const GenerationRequest& request) {
  if (request.n < 1) throw std::invalid_argument("request.n must be >= 1");
  if (request.temperature < 0.0 || request.temperature > 2.0) {
    throw std::invalid_argument("temperature must lie in [0,2]");
  }
  if (request.max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
}

std::vector<Candidate> call_completions(const LlmEndpointConfig& endpoint,
                                        const GenerationRequest& request, int n) {
  const auto url = parse_url(endpoint.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  client.set_read_timeout(endpoint.timeout_seconds, 0);
  client.set_write_timeout(endpoint.timeout_seconds, 0);

  httplib::Headers headers;
  if (!endpoint.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  }

  json body;
  body["model"] = endpoint.model;
  body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["n"] = n;
  body["max_tokens"] = request.max_tokens;

  const auto started = std::chrono::steady_clock::now();
  auto result = client.Post(url.path + "/chat/completions", headers, body.dump(), "application/json");
  if (!result) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    if (result.error() == httplib::Error::ConnectionTimeout ||
        elapsed >= endpoint.timeout_seconds) {
      throw TimeoutError("llm endpoint timed out after " +
                         std::to_string(endpoint.timeout_seconds) + "s");
    }
    throw NetworkError("llm endpoint unreachable: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw ApiError(result->status, result->body);
  }

  json parsed;
  try {
    parsed = json::parse(result->body);
  } catch (const json::exception& err) {
    throw ProtocolError(std::string("llm response is not JSON: ") + err.what());
  }
  if (!parsed.contains("choices") || !parsed.at("choices").is_array() ||
      parsed.at("choices").empty()) {
    throw ProtocolError("llm response has no choices");
  }

  std::vector<Candidate> candidates;
  for (const auto& choice : parsed.at("choices")) {
    if (!choice.contains("message") || !choice.at("message").contains("content") ||
        !choice.at("message").at("content").is_string()) {
      throw ProtocolError("llm choice has no message content");
    }
    Candidate candidate;
    candidate.text = choice.at("message").at("content").get<std::string>();
    candidate.finish_reason = choice.value("finish_reason", "stop");
    candidate.truncated = candidate.finish_reason == "length";
    candidates.push_back(std::move(candidate));
    if (candidates.size() >= static_cast<std::size_t>(n)) break;
  }
  return candidates;
}

}  // namespace

LlmEndpointConfig LlmEndpointConfig::from_env(LlmEndpointConfig defaults) {
  if (const char* value = std::getenv("ADFORGE_LLM_BASE_URL")) defaults.base_url = value;
  if (const char* value = std::getenv("ADFORGE_LLM_API_KEY")) defaults.api_key = value;
  if (const char* value = std::getenv("ADFORGE_LLM_MODEL")) defaults.model = value;
  return defaults;
}

std::vector<Candidate> sample_candidates(const LlmEndpointConfig& endpoint,
                                         const GenerationRequest& request) {
  validate(request);

  auto candidates = call_completions(endpoint, request, request.n);

  // Top up with single-completion calls when the endpoint returned fewer
  // choices than requested, a bounded wave at a time.
  const auto missing = static_cast<std::size_t>(request.n) - candidates.size();
  if (missing > 0) {
    const auto wave = static_cast<std::size_t>(std::max(endpoint.max_in_flight, 1));
    std::vector<Candidate> extra(missing);
    for (std::size_t begin = 0; begin < missing; begin += wave) {
      const auto end = std::min(begin + wave, missing);
      std::vector<std::future<std::vector<Candidate>>> inflight;
      for (std::size_t slot = begin; slot < end; ++slot) {
        inflight.push_back(std::async(std::launch::async, [&endpoint, &request] {
          return call_completions(endpoint, request, 1);
        }));
      }
      for (std::size_t slot = begin; slot < end; ++slot) {
        auto batch = inflight[slot - begin].get();
        extra[slot] = std::move(batch.front());
      }
    }
    for (auto& candidate : extra) candidates.push_back(std::move(candidate));
  }

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].index = static_cast<int>(i);
  }
  return candidates;
}

}  // namespace adforge::gen
