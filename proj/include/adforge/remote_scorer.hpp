#pragma once

#include <string>

#include "adforge/errors.hpp"

namespace adforge::classifier {

// Endpoint that accepts {"query","response"} and answers {"probability"}.
struct RemoteScorerConfig {
  std::string endpoint;
  int timeout_seconds = 30;
};

// Returns the scored probability in [0, 1]. Throws NetworkError on transport
// failure, TimeoutError past the deadline, ApiError on a non-2xx status and
// ProtocolError when the body is not the expected shape.
double remote_score(const RemoteScorerConfig& config, const std::string& query,
                    const std::string& response);

}  // namespace adforge::classifier
