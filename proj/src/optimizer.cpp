#include "adforge/optimizer.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace adforge::opt {

using nlohmann::ordered_json;

Selection select_best(const std::vector<gen::Candidate>& candidates, const Scorer& scorer) {
  if (candidates.empty()) throw EmptyCandidates("cannot select from zero candidates");
  Selection selection;
  selection.scores.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    selection.scores.push_back(scorer(candidate.text));
  }
  for (std::size_t i = 1; i < selection.scores.size(); ++i) {
    if (selection.scores[i] < selection.scores[static_cast<std::size_t>(selection.chosen_index)]) {
      selection.chosen_index = static_cast<int>(i);
    }
  }
  return selection;
}

CandidateSet rewrite_best_of_n(const corpus::QueryTask& task, const std::string& base_response,
                               const corpus::AdItem& item, gen::GenerationBackend& backend,
                               const Scorer& scorer, const GenOptions& options) {
  if (options.n < 1) throw std::invalid_argument("n must be >= 1");

  gen::GenerationRequest request;
  request.prompt = gen::build_rewrite_prompt(task.query, base_response, item);
  request.temperature = options.temperature;
  request.n = options.n;
  request.max_tokens = options.max_tokens;
  request.seed = options.seed;

  CandidateSet set;
  set.query = task.query;
  set.base_response = base_response;
  set.item = item;
  set.candidates = backend.generate(request);
  auto selection = select_best(set.candidates, scorer);
  set.scores = std::move(selection.scores);
  set.chosen_index = selection.chosen_index;
  return set;
}

SftRecord build_sft_record(const std::string& query, const std::string& base_response,
                           const corpus::AdItem& item, const std::vector<BackendChoice>& backends,
                           const Scorer& scorer, int m, const GenOptions& options) {
  if (m < 2) throw std::invalid_argument("sft sampling needs m >= 2 candidates");
  if (backends.empty()) throw std::invalid_argument("sft sampling needs at least one backend");

  const auto prompt = gen::build_rewrite_prompt(query, base_response, item);
  std::vector<gen::Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(m));
  for (int draw = 0; draw < m; ++draw) {
    const auto& choice = backends[static_cast<std::size_t>(draw) % backends.size()];
    gen::GenerationRequest request;
    request.prompt = prompt;
    request.temperature = choice.temperature;
    request.n = 1;
    request.max_tokens = options.max_tokens;
    if (options.seed.has_value()) {
      request.seed = *options.seed + static_cast<std::uint64_t>(draw);
    }
    auto batch = choice.backend->generate(request);
    if (batch.empty()) throw EmptyCandidates("backend returned no candidate for draw");
    auto candidate = std::move(batch.front());
    candidate.index = draw;
    candidates.push_back(std::move(candidate));
  }

  const auto selection = select_best(candidates, scorer);
  SftRecord record;
  record.prompt = prompt;
  for (auto& candidate : candidates) record.candidates.push_back(std::move(candidate.text));
  record.scores = selection.scores;
  record.chosen_index = selection.chosen_index;
  record.completion = record.candidates[static_cast<std::size_t>(record.chosen_index)];
  return record;
}

std::filesystem::path audit_path_for(const std::filesystem::path& sft_path) {
  auto sidecar = sft_path;
  sidecar.replace_extension();
  sidecar += ".audit.jsonl";
  return sidecar;
}

namespace {

void check_record(const SftRecord& record, std::size_t position) {
  const auto fail = [&](const std::string& what) {
    throw InvariantViolation("sft record " + std::to_string(position) + ": " + what);
  };
  if (record.candidates.empty()) fail("no candidates");
  if (record.scores.size() != record.candidates.size()) fail("scores misaligned with candidates");
  if (record.chosen_index < 0 ||
      static_cast<std::size_t>(record.chosen_index) >= record.candidates.size()) {
    fail("chosen_index out of range");
  }
  if (record.completion != record.candidates[static_cast<std::size_t>(record.chosen_index)]) {
    fail("completion is not the chosen candidate");
  }
  const auto smallest = *std::min_element(record.scores.begin(), record.scores.end());
  if (record.scores[static_cast<std::size_t>(record.chosen_index)] != smallest) {
    fail("chosen candidate does not attain the minimum score");
  }
}

}  // namespace

std::size_t emit_sft_dataset(const std::vector<SftRecord>& records,
                             const std::filesystem::path& path) {
  for (std::size_t i = 0; i < records.size(); ++i) check_record(records[i], i);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  std::ofstream audit(audit_path_for(path), std::ios::binary | std::ios::trunc);
  if (!audit) throw IoError("cannot open " + audit_path_for(path).string() + " for writing");

  for (const auto& record : records) {
    ordered_json line;
    line["prompt"] = record.prompt;
    line["completion"] = record.completion;
    out << line.dump() << '\n';

    ordered_json shadow;
    shadow["prompt"] = record.prompt;
    shadow["candidates"] = record.candidates;
    shadow["scores"] = record.scores;
    shadow["chosen_index"] = record.chosen_index;
    audit << shadow.dump() << '\n';
  }
  out.flush();
  audit.flush();
  if (!out || !audit) throw IoError("write failed: " + path.string());
  return records.size();
}

}  // namespace adforge::opt
