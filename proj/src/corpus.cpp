#include "adforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"

namespace adforge::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Source source) {
  switch (source) {
    case Source::webis:
      return "webis";
    case Source::naive_synth:
      return "naive_synth";
    case Source::structured_synth:
      return "structured_synth";
    case Source::pipeline:
      return "pipeline";
  }
  throw SchemaError("unknown source enum value");
}

Source source_from_string(const std::string& name) {
  if (name == "webis") return Source::webis;
  if (name == "naive_synth") return Source::naive_synth;
  if (name == "structured_synth") return Source::structured_synth;
  if (name == "pipeline") return Source::pipeline;
  throw SchemaError("unknown source: " + name);
}

namespace {

std::string require_string(const json& object, const char* key, bool allow_empty = false) {
  if (!object.contains(key) || !object.at(key).is_string()) {
    throw SchemaError(std::string("missing or non-string field \"") + key + "\"");
  }
  std::string value = object.at(key).get<std::string>();
  if (!allow_empty && value.empty()) {
    throw SchemaError(std::string("field \"") + key + "\" must be nonempty");
  }
  return value;
}

QueryTask parse_task(const json& object) {
  QueryTask task;
  task.id = require_string(object, "id");
  task.query = require_string(object, "query", /*allow_empty=*/true);
  if (object.contains("items")) {
    if (!object.at("items").is_array()) throw SchemaError("\"items\" must be an array");
    for (const auto& entry : object.at("items")) {
      AdItem item;
      item.item = require_string(entry, "item");
      item.type = require_string(entry, "type", /*allow_empty=*/true);
      item.qualities = require_string(entry, "qualities", /*allow_empty=*/true);
      task.items.push_back(std::move(item));
    }
  }
  if (object.contains("passages")) {
    if (!object.at("passages").is_array()) throw SchemaError("\"passages\" must be an array");
    int previous_rank = 0;
    for (const auto& entry : object.at("passages")) {
      Passage passage;
      passage.docid = require_string(entry, "docid");
      passage.text = require_string(entry, "text");
      if (!entry.contains("rank") || !entry.at("rank").is_number_integer()) {
        throw SchemaError("passage \"rank\" must be an integer");
      }
      passage.rank = entry.at("rank").get<int>();
      if (passage.rank < 1) throw SchemaError("passage rank must be >= 1");
      if (passage.rank <= previous_rank) {
        throw SchemaError("passages must be ordered by strictly ascending rank");
      }
      previous_rank = passage.rank;
      task.passages.push_back(std::move(passage));
    }
  }
  return task;
}

LabeledExample parse_labeled(const json& object) {
  LabeledExample example;
  example.id = require_string(object, "id");
  example.query = require_string(object, "query", /*allow_empty=*/true);
  example.response = require_string(object, "response");
  if (!object.contains("label") || !object.at("label").is_number_integer()) {
    throw SchemaError("\"label\" must be an integer");
  }
  const auto label = object.at("label").get<int>();
  if (label != 0 && label != 1) {
    throw SchemaError("label must be 0 or 1, got " + std::to_string(label));
  }
  example.label = label;
  example.source =
      object.contains("source") ? source_from_string(require_string(object, "source")) : Source::pipeline;
  return example;
}

ordered_json task_to_json(const QueryTask& task) {
  ordered_json object;
  object["id"] = task.id;
  object["query"] = task.query;
  auto items = ordered_json::array();
  for (const auto& item : task.items) {
    items.push_back({{"item", item.item}, {"type", item.type}, {"qualities", item.qualities}});
  }
  object["items"] = std::move(items);
  auto passages = ordered_json::array();
  for (const auto& passage : task.passages) {
    passages.push_back({{"docid", passage.docid}, {"text", passage.text}, {"rank", passage.rank}});
  }
  object["passages"] = std::move(passages);
  return object;
}

ordered_json labeled_to_json(const LabeledExample& example) {
  ordered_json object;
  object["id"] = example.id;
  object["query"] = example.query;
  object["response"] = example.response;
  object["label"] = example.label;
  object["source"] = to_string(example.source);
  return object;
}

template <typename Record, typename Parser>
std::vector<Record> load_jsonl(const std::filesystem::path& path, Parser parse) {
  if (!std::filesystem::exists(path)) {
    throw MissingFile("no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<Record> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      records.push_back(parse(json::parse(line)));
    } catch (const json::exception& err) {
      throw SchemaError(path.string() + ":" + std::to_string(line_number) + ": " + err.what());
    } catch (const SchemaError& err) {
      throw SchemaError(path.string() + ":" + std::to_string(line_number) + ": " + err.what());
    }
  }
  return records;
}

template <typename Record, typename Serializer>
std::size_t write_jsonl_impl(const std::vector<Record>& records, const std::filesystem::path& path,
                             Serializer serialize) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& record : records) {
    out << serialize(record).dump() << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
  return records.size();
}

}  // namespace

std::vector<QueryTask> load_topics(const std::filesystem::path& path) {
  auto tasks = load_jsonl<QueryTask>(path, parse_task);
  std::vector<std::string> ids;
  ids.reserve(tasks.size());
  for (const auto& task : tasks) ids.push_back(task.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw SchemaError(path.string() + ": duplicate task id");
  }
  return tasks;
}

std::vector<LabeledExample> load_labeled(const std::filesystem::path& path) {
  return load_jsonl<LabeledExample>(path, parse_labeled);
}

std::size_t write_jsonl(const std::vector<QueryTask>& records, const std::filesystem::path& path) {
  return write_jsonl_impl(records, path, task_to_json);
}

std::size_t write_jsonl(const std::vector<LabeledExample>& records, const std::filesystem::path& path) {
  return write_jsonl_impl(records, path, labeled_to_json);
}

DatasetSplit split_dataset(const std::vector<LabeledExample>& examples, double held_out_fraction,
                           std::uint64_t seed) {
  if (examples.size() < 2) {
    throw TooFewExamples("split needs at least 2 examples, got " + std::to_string(examples.size()));
  }
  if (!(held_out_fraction > 0.0 && held_out_fraction < 1.0)) {
    throw std::invalid_argument("held_out_fraction must lie in (0,1)");
  }

  const auto n = examples.size();
  // Canonical order by (id, original index) so the split is a function of the
  // id/label multiset rather than of input order.
  std::vector<std::size_t> canonical(n);
  std::iota(canonical.begin(), canonical.end(), std::size_t{0});
  std::sort(canonical.begin(), canonical.end(), [&](std::size_t a, std::size_t b) {
    if (examples[a].id != examples[b].id) return examples[a].id < examples[b].id;
    return a < b;
  });

  std::array<std::vector<std::size_t>, 2> by_label;
  for (const auto index : canonical) by_label[examples[index].label].push_back(index);

  for (auto label : {0, 1}) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(label) + 1);
    std::shuffle(by_label[label].begin(), by_label[label].end(), rng);
  }

  const auto held_total = static_cast<std::size_t>(std::llround(held_out_fraction * static_cast<double>(n)));
  // Largest-remainder allocation keeps each label within one example of the
  // stratified ideal while hitting the rounded total exactly.
  std::array<std::size_t, 2> held_per_label{};
  std::array<double, 2> remainder{};
  std::size_t allocated = 0;
  for (auto label : {0, 1}) {
    const double ideal = held_out_fraction * static_cast<double>(by_label[label].size());
    held_per_label[label] = std::min(static_cast<std::size_t>(ideal), by_label[label].size());
    remainder[label] = ideal - static_cast<double>(held_per_label[label]);
    allocated += held_per_label[label];
  }
  while (allocated < held_total) {
    int pick = remainder[0] >= remainder[1] ? 0 : 1;
    if (held_per_label[pick] >= by_label[pick].size()) pick = 1 - pick;
    ++held_per_label[pick];
    remainder[pick] -= 1.0;
    ++allocated;
  }
  while (allocated > held_total) {
    int pick = remainder[0] < remainder[1] ? 0 : 1;
    if (held_per_label[pick] == 0) pick = 1 - pick;
    --held_per_label[pick];
    remainder[pick] += 1.0;
    --allocated;
  }

  std::vector<std::size_t> held_indices;
  std::vector<std::size_t> train_indices;
  for (auto label : {0, 1}) {
    const auto& group = by_label[label];
    held_indices.insert(held_indices.end(), group.begin(), group.begin() + held_per_label[label]);
    train_indices.insert(train_indices.end(), group.begin() + held_per_label[label], group.end());
  }
  auto by_id = [&](std::size_t a, std::size_t b) { return examples[a].id < examples[b].id; };
  std::sort(held_indices.begin(), held_indices.end(), by_id);
  std::sort(train_indices.begin(), train_indices.end(), by_id);

  DatasetSplit split;
  split.seed = seed;
  for (const auto index : train_indices) split.train.push_back(examples[index]);
  for (const auto index : held_indices) split.held_out.push_back(examples[index]);
  return split;
}

}  // namespace adforge::corpus
