#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adforge/corpus.hpp"
#include "adforge/errors.hpp"
#include "adforge/generator.hpp"

namespace adforge::opt {

// Probability-style scorer over candidate texts; lower is better.
using Scorer = std::function<double(const std::string&)>;

// One rewrite round: all sampled candidates with their scores and the argmin
// pick (lowest index on ties).
struct CandidateSet {
  std::string query;
  std::string base_response;
  corpus::AdItem item;
  std::vector<gen::Candidate> candidates;
  std::vector<double> scores;
  int chosen_index = 0;

  const gen::Candidate& chosen() const { return candidates[static_cast<std::size_t>(chosen_index)]; }
};

struct Selection {
  std::vector<double> scores;
  int chosen_index = 0;
};

// Scores every candidate and picks the smallest score, earliest index first.
// Throws EmptyCandidates.
Selection select_best(const std::vector<gen::Candidate>& candidates, const Scorer& scorer);

struct GenOptions {
  int n = 10;
  double temperature = 1.0;
  int max_tokens = 512;
  std::optional<std::uint64_t> seed;  // forwarded to stub backends
};

// Builds the rewrite prompt, samples options.n candidates and applies
// select_best. n=1 degenerates to zero-shot rewriting.
CandidateSet rewrite_best_of_n(const corpus::QueryTask& task, const std::string& base_response,
                               const corpus::AdItem& item, gen::GenerationBackend& backend,
                               const Scorer& scorer, const GenOptions& options = {});

// Fine-tuning example: the rewrite prompt paired with the best-scoring
// completion, plus the full candidate set for auditing.
struct SftRecord {
  std::string prompt;
  std::string completion;
  std::vector<std::string> candidates;
  std::vector<double> scores;
  int chosen_index = 0;
};

// One generation source for SFT sampling; sources are cycled across the m
// draws so mixed backends and temperatures contribute evenly.
struct BackendChoice {
  gen::GenerationBackend* backend = nullptr;
  double temperature = 1.0;
};

SftRecord build_sft_record(const std::string& query, const std::string& base_response,
                           const corpus::AdItem& item, const std::vector<BackendChoice>& backends,
                           const Scorer& scorer, int m = 5, const GenOptions& options = {});

// Sidecar path holding full candidate sets next to an SFT file.
std::filesystem::path audit_path_for(const std::filesystem::path& sft_path);

// Writes {"prompt","completion"} JSONL plus the audit sidecar. Every record
// is re-checked against its invariants first (InvariantViolation).
std::size_t emit_sft_dataset(const std::vector<SftRecord>& records,
                             const std::filesystem::path& path);

}  // namespace adforge::opt
