#include "adforge/optimizer.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "testutil.hpp"

using namespace adforge;
using gen::Candidate;
using opt::BackendChoice;
using opt::GenOptions;

namespace {

std::vector<Candidate> candidates_named(const std::vector<std::string>& texts) {
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    candidates.push_back({static_cast<int>(i), texts[i], "stop", false});
  }
  return candidates;
}

opt::Scorer table_scorer(std::map<std::string, double> table) {
  return [table = std::move(table)](const std::string& text) { return table.at(text); };
}

corpus::QueryTask task_of(const std::string& query) {
  corpus::QueryTask task;
  task.id = "task";
  task.query = query;
  return task;
}

const corpus::AdItem kItem{"AcmeCam X", "camera", "lightweight, sharp"};

// Generation double that logs the temperature of every call and answers with
// a call-numbered text.
class RecordingBackend : public gen::GenerationBackend {
 public:
  explicit RecordingBackend(std::string tag) : tag_(std::move(tag)) {}
  std::vector<Candidate> generate(const gen::GenerationRequest& request) override {
    temperatures.push_back(request.temperature);
    std::vector<Candidate> batch;
    for (int i = 0; i < request.n; ++i) {
      batch.push_back({i, tag_ + "#" + std::to_string(calls_) + "." + std::to_string(i), "stop",
                       false});
    }
    ++calls_;
    return batch;
  }
  std::vector<double> temperatures;

 private:
  std::string tag_;
  int calls_ = 0;
};

}  // namespace

TEST_CASE("select_best picks the unique minimum") {
  const auto selection = opt::select_best(
      candidates_named({"a", "b", "c"}), table_scorer({{"a", 0.4}, {"b", 0.2}, {"c", 0.9}}));
  CHECK(selection.chosen_index == 1);
  CHECK(selection.scores == std::vector<double>{0.4, 0.2, 0.9});
}

TEST_CASE("select_best breaks ties toward the lowest index") {
  const auto selection = opt::select_best(
      candidates_named({"a", "b", "c"}), table_scorer({{"a", 0.5}, {"b", 0.5}, {"c", 0.5}}));
  CHECK(selection.chosen_index == 0);
}

TEST_CASE("select_best agrees with a brute-force scan on seeded scores") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int round = 0; round < 20; ++round) {
    std::vector<std::string> texts;
    std::map<std::string, double> table;
    for (int i = 0; i < 10; ++i) {
      texts.push_back("cand-" + std::to_string(round) + "-" + std::to_string(i));
      table[texts.back()] = uniform(rng);
    }
    const auto selection = opt::select_best(candidates_named(texts), table_scorer(table));

    int expected = 0;
    for (int i = 1; i < 10; ++i) {
      if (table.at(texts[static_cast<std::size_t>(i)]) <
          table.at(texts[static_cast<std::size_t>(expected)])) {
        expected = i;
      }
    }
    CHECK(selection.chosen_index == expected);
  }
}

TEST_CASE("select_best refuses an empty candidate list") {
  CHECK_THROWS_AS(opt::select_best({}, [](const std::string&) { return 0.0; }), EmptyCandidates);
}

TEST_CASE("the choice survives strictly monotone score transforms") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::string> texts;
  std::map<std::string, double> table;
  for (int i = 0; i < 8; ++i) {
    texts.push_back("c" + std::to_string(i));
    table[texts.back()] = uniform(rng);
  }
  const auto candidates = candidates_named(texts);
  const auto base = opt::select_best(candidates, table_scorer(table));

  auto transformed = [&](auto transform) {
    std::map<std::string, double> scaled;
    for (const auto& [text, score] : table) scaled[text] = transform(score);
    return opt::select_best(candidates, table_scorer(scaled)).chosen_index;
  };
  CHECK(transformed([](double s) { return 0.1 + 0.5 * s; }) == base.chosen_index);
  CHECK(transformed([](double s) { return std::exp(3.0 * s); }) == base.chosen_index);
  CHECK(transformed([](double s) { return s * s * s + 2.0; }) == base.chosen_index);
}

TEST_CASE("selected scores never beat the batch mean") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double selected_sum = 0.0;
  double all_sum = 0.0;
  int all_count = 0;
  for (int batch = 0; batch < 30; ++batch) {
    std::vector<std::string> texts;
    std::map<std::string, double> table;
    for (int i = 0; i < 6; ++i) {
      texts.push_back("b" + std::to_string(batch) + "c" + std::to_string(i));
      table[texts.back()] = uniform(rng);
    }
    const auto selection = opt::select_best(candidates_named(texts), table_scorer(table));
    selected_sum += selection.scores[static_cast<std::size_t>(selection.chosen_index)];
    for (const auto score : selection.scores) all_sum += score;
    all_count += 6;
  }
  CHECK(selected_sum / 30.0 <= all_sum / all_count);
}

TEST_CASE("best-of-one equals zero-shot rewriting") {
  gen::StubBackend backend;
  GenOptions options;
  options.n = 1;
  options.seed = 17;
  const auto set = opt::rewrite_best_of_n(task_of("best camera"), "Use a tripod at dusk.", kItem,
                                          backend, [](const std::string&) { return 0.5; },
                                          options);
  REQUIRE(set.candidates.size() == 1);
  CHECK(set.chosen_index == 0);

  gen::GenerationRequest request;
  request.prompt = gen::build_rewrite_prompt("best camera", "Use a tripod at dusk.", kItem);
  request.temperature = options.temperature;
  request.n = 1;
  request.max_tokens = options.max_tokens;
  request.seed = 17;
  CHECK(set.chosen().text == gen::stub_generate(request)[0].text);
}

TEST_CASE("a length scorer picks the shortest of ten rewrites") {
  gen::StubBackend backend;
  GenOptions options;
  options.n = 10;
  options.seed = 23;
  const auto set = opt::rewrite_best_of_n(
      task_of("best camera"), "Use a tripod at dusk.", kItem, backend,
      [](const std::string& text) { return static_cast<double>(text.size()); }, options);
  REQUIRE(set.candidates.size() == 10);
  std::size_t shortest = set.candidates[0].text.size();
  for (const auto& candidate : set.candidates) {
    shortest = std::min(shortest, candidate.text.size());
  }
  CHECK(set.chosen().text.size() == shortest);
}

TEST_CASE("temperature zero makes all scores equal and keeps index zero") {
  gen::StubBackend backend;
  GenOptions options;
  options.n = 10;
  options.temperature = 0.0;
  options.seed = 5;
  const auto set = opt::rewrite_best_of_n(
      task_of("best camera"), "Use a tripod at dusk.", kItem, backend,
      [](const std::string& text) { return static_cast<double>(text.size()); }, options);
  for (const auto score : set.scores) CHECK(score == set.scores[0]);
  CHECK(set.chosen_index == 0);
}

TEST_CASE("sft records pair the prompt with the minimum-score completion") {
  gen::StubBackend backend;
  GenOptions options;
  options.seed = 31;
  const std::vector<BackendChoice> backends = {{&backend, 1.0}};
  const auto record = opt::build_sft_record(
      "best camera", "Use a tripod at dusk.", kItem, backends,
      [](const std::string& text) { return static_cast<double>(text.size()); }, 5, options);
  REQUIRE(record.candidates.size() == 5);
  REQUIRE(record.scores.size() == 5);
  CHECK(record.prompt == gen::build_rewrite_prompt("best camera", "Use a tripod at dusk.", kItem));
  CHECK(record.completion == record.candidates[static_cast<std::size_t>(record.chosen_index)]);
  const auto smallest = *std::min_element(record.scores.begin(), record.scores.end());
  CHECK(record.scores[static_cast<std::size_t>(record.chosen_index)] == smallest);
}

TEST_CASE("identical candidates tie toward index zero") {
  gen::StubBackend backend;
  GenOptions options;
  options.seed = 31;
  // Temperature 0 collapses the stub, but each draw uses seed+draw, so force
  // equality through a constant scorer instead.
  const std::vector<BackendChoice> backends = {{&backend, 0.0}};
  const auto record = opt::build_sft_record("best camera", "Use a tripod at dusk.", kItem,
                                            backends, [](const std::string&) { return 0.5; }, 2,
                                            options);
  CHECK(record.chosen_index == 0);
}

TEST_CASE("the minimum-score invariant holds over 50 seeded runs") {
  gen::StubBackend backend;
  const std::vector<BackendChoice> backends = {{&backend, 1.0}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GenOptions options;
    options.seed = seed;
    const auto record = opt::build_sft_record(
        "best camera", "Use a tripod at dusk.", kItem, backends,
        [](const std::string& text) { return static_cast<double>(text.size()); }, 5, options);
    const auto smallest = *std::min_element(record.scores.begin(), record.scores.end());
    CHECK(record.scores[static_cast<std::size_t>(record.chosen_index)] == smallest);
    CHECK(record.completion == record.candidates[static_cast<std::size_t>(record.chosen_index)]);
  }
}

TEST_CASE("sft sampling cycles through the backend list") {
  RecordingBackend cool("cool");
  RecordingBackend warm("warm");
  const std::vector<BackendChoice> backends = {{&cool, 0.5}, {&warm, 1.0}};
  const auto record = opt::build_sft_record("best camera", "Use a tripod at dusk.", kItem,
                                            backends, [](const std::string&) { return 0.5; }, 5);
  CHECK(cool.temperatures == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(warm.temperatures == std::vector<double>{1.0, 1.0});
  CHECK(record.candidates.size() == 5);
  CHECK(record.candidates[0].rfind("cool#", 0) == 0);
  CHECK(record.candidates[1].rfind("warm#", 0) == 0);
}

TEST_CASE("sft sampling validates its arguments") {
  gen::StubBackend backend;
  const std::vector<BackendChoice> backends = {{&backend, 1.0}};
  CHECK_THROWS_AS(opt::build_sft_record("q", "r", kItem, backends,
                                        [](const std::string&) { return 0.5; }, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(opt::build_sft_record("q", "r", kItem, {},
                                        [](const std::string&) { return 0.5; }, 5),
                  std::invalid_argument);
}

TEST_CASE("emitting zero records leaves empty files") {
  testutil::TempDir dir;
  const auto path = dir.file("sft.jsonl");
  CHECK(opt::emit_sft_dataset({}, path) == 0);
  CHECK(std::filesystem::file_size(path) == 0);
  CHECK(std::filesystem::file_size(opt::audit_path_for(path)) == 0);
}

TEST_CASE("sft files round-trip and the sidecar keeps full candidate sets") {
  testutil::TempDir dir;
  std::vector<opt::SftRecord> records;
  for (int i = 0; i < 3; ++i) {
    opt::SftRecord record;
    record.prompt = "prompt " + std::to_string(i);
    record.candidates = {"long candidate " + std::to_string(i), "short " + std::to_string(i)};
    record.scores = {0.8, 0.3};
    record.chosen_index = 1;
    record.completion = record.candidates[1];
    records.push_back(std::move(record));
  }
  const auto path = dir.file("sft.jsonl");
  CHECK(opt::emit_sft_dataset(records, path) == 3);
  CHECK(opt::audit_path_for(path).filename() == "sft.audit.jsonl");

  std::istringstream main_lines(testutil::read_file(path));
  std::string line;
  int count = 0;
  while (std::getline(main_lines, line)) {
    const auto parsed = nlohmann::json::parse(line);
    CHECK(parsed.at("prompt") == records[count].prompt);
    CHECK(parsed.at("completion") == records[count].completion);
    CHECK(parsed.size() == 2);
    ++count;
  }
  CHECK(count == 3);

  std::istringstream audit_lines(testutil::read_file(opt::audit_path_for(path)));
  count = 0;
  while (std::getline(audit_lines, line)) {
    const auto parsed = nlohmann::json::parse(line);
    CHECK(parsed.at("candidates").get<std::vector<std::string>>() == records[count].candidates);
    CHECK(parsed.at("scores").get<std::vector<double>>() == records[count].scores);
    CHECK(parsed.at("chosen_index") == 1);
    ++count;
  }
  CHECK(count == 3);
}

TEST_CASE("broken sft records refuse to serialize") {
  testutil::TempDir dir;
  opt::SftRecord valid;
  valid.prompt = "p";
  valid.candidates = {"a", "b"};
  valid.scores = {0.9, 0.1};
  valid.chosen_index = 1;
  valid.completion = "b";

  SUBCASE("completion not the chosen candidate") {
    auto broken = valid;
    broken.completion = "a";
    CHECK_THROWS_AS(opt::emit_sft_dataset({broken}, dir.file("x.jsonl")), InvariantViolation);
  }
  SUBCASE("chosen score above the minimum") {
    auto broken = valid;
    broken.chosen_index = 0;
    broken.completion = "a";
    CHECK_THROWS_AS(opt::emit_sft_dataset({broken}, dir.file("x.jsonl")), InvariantViolation);
  }
  SUBCASE("scores misaligned") {
    auto broken = valid;
    broken.scores = {0.9};
    CHECK_THROWS_AS(opt::emit_sft_dataset({broken}, dir.file("x.jsonl")), InvariantViolation);
  }
  SUBCASE("index out of range") {
    auto broken = valid;
    broken.chosen_index = 5;
    CHECK_THROWS_AS(opt::emit_sft_dataset({broken}, dir.file("x.jsonl")), InvariantViolation);
  }
}
