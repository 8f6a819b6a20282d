#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "adforge/corpus.hpp"
#include "adforge/errors.hpp"

namespace adforge::gen {

// Text template with {name} placeholders. Rendering is a single pass: bound
// values are copied verbatim and never re-scanned, and every placeholder in
// the body must have a binding.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  PromptTemplate(std::string name, std::string body);

  const std::string& name() const { return name_; }
  const std::string& body() const { return body_; }
  const std::set<std::string>& required_placeholders() const { return required_; }

  std::string render(const std::map<std::string, std::string>& bindings) const;

 private:
  std::string name_;
  std::string body_;
  std::set<std::string> required_;
};

struct GenerationRequest {
  std::string prompt;
  double temperature = 1.0;  // [0, 2]
  int n = 1;
  int max_tokens = 512;
  std::optional<std::uint64_t> seed;  // required by the stub generator only
};

struct Candidate {
  int index = 0;
  std::string text;
  std::string finish_reason;
  bool truncated = false;  // set when finish_reason reports a length cutoff
};

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::vector<Candidate> generate(const GenerationRequest& request) = 0;
};

// Renders the QA prompt with the top-k passages joined by blank lines in rank
// order. Throws EmptyPassages when the task has no passages at all.
std::string build_qa_prompt(const corpus::QueryTask& task, int top_k);

// Renders the ad-rewrite prompt. All inputs must be nonempty (MissingField).
std::string build_rewrite_prompt(const std::string& query, const std::string& response,
                                 const corpus::AdItem& item);

// Offline test double: a deterministic function of (prompt, seed, index).
// Each candidate is the prompt's query line plus a seeded pseudo-random
// suffix drawn from a fixed word list; temperature 0 makes all candidates
// identical. Prompts that ask for the structured summary format get a
// parseable Summary/Key Features block built from the same material.
std::vector<Candidate> stub_generate(const GenerationRequest& request);

class StubBackend : public GenerationBackend {
 public:
  std::vector<Candidate> generate(const GenerationRequest& request) override {
    return stub_generate(request);
  }
};

struct LlmEndpointConfig {
  std::string base_url;  // e.g. "http://localhost:8080/v1"
  std::string api_key;
  std::string model;
  int timeout_seconds = 30;
  int max_in_flight = 4;

  // Reads ADFORGE_LLM_BASE_URL / ADFORGE_LLM_API_KEY / ADFORGE_LLM_MODEL on
  // top of the given defaults.
  static LlmEndpointConfig from_env(LlmEndpointConfig defaults);
  static LlmEndpointConfig from_env() { return from_env(LlmEndpointConfig{}); }
};

// Chat-completion call returning exactly request.n candidates. Endpoints that
// cap n are topped up with repeated single-completion calls (fanned out up to
// max_in_flight at a time), reassembled in request order.
std::vector<Candidate> sample_candidates(const LlmEndpointConfig& endpoint,
                                         const GenerationRequest& request);

class HttpBackend : public GenerationBackend {
 public:
  explicit HttpBackend(LlmEndpointConfig config) : config_(std::move(config)) {}
  std::vector<Candidate> generate(const GenerationRequest& request) override {
    return sample_candidates(config_, request);
  }

 private:
  LlmEndpointConfig config_;
};

namespace prompts {

// Canonical template bodies shipped with the pipeline. The QA, rewrite,
// naive-insertion, hard-positive and hard-negative texts are contract-fixed
// and pinned by golden-file tests.
const PromptTemplate& qa_template();
const PromptTemplate& rewrite_template();
const PromptTemplate& naive_insertion_template();
const PromptTemplate& hard_positive_template();
const PromptTemplate& hard_negative_template();
const PromptTemplate& summarize_template();

}  // namespace prompts

}  // namespace adforge::gen
