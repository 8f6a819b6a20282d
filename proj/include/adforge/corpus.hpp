#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adforge/errors.hpp"

namespace adforge::corpus {

struct Passage {
  std::string docid;
  std::string text;
  int rank = 1;  // 1-based retrieval rank

  bool operator==(const Passage&) const = default;
};

// One item to advertise. Fields map one-to-one onto the rewrite prompt
// placeholders {item}, {type}, {qualities}.
struct AdItem {
  std::string item;       // short description of the product or service
  std::string type;       // category, e.g. "camera"
  std::string qualities;  // comma-joined qualities string

  bool operator==(const AdItem&) const = default;
};

// A query with its retrieved passages and zero or more items to integrate.
// Passages are stored in ascending rank order; an empty item list means a
// plain informative answer is expected.
struct QueryTask {
  std::string id;
  std::string query;
  std::vector<Passage> passages;
  std::vector<AdItem> items;

  bool operator==(const QueryTask&) const = default;
};

enum class Source { webis, naive_synth, structured_synth, pipeline };

std::string to_string(Source source);
Source source_from_string(const std::string& name);

// (query, response, label) triple used for classifier training and evaluation.
struct LabeledExample {
  std::string id;
  std::string query;
  std::string response;
  int label = 0;  // 0 = no ad, 1 = ad
  Source source = Source::pipeline;

  bool operator==(const LabeledExample&) const = default;
};

struct DatasetSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> held_out;
  std::uint64_t seed = 0;
};

// Loads the topics JSONL file. Tasks come back in file order; the first
// malformed line raises SchemaError carrying its line number.
std::vector<QueryTask> load_topics(const std::filesystem::path& path);

// Loads the labeled-example JSONL file. Labels are parsed strictly as 0/1.
std::vector<LabeledExample> load_labeled(const std::filesystem::path& path);

// One JSON object per line, UTF-8, LF-terminated. Returns the record count.
std::size_t write_jsonl(const std::vector<QueryTask>& records, const std::filesystem::path& path);
std::size_t write_jsonl(const std::vector<LabeledExample>& records, const std::filesystem::path& path);

// Deterministic stratified split. |held_out| = round(fraction * n) and each
// part's label ratio sits within one example of the stratified ideal. The
// result depends only on (ids, labels, fraction, seed), not on input order.
DatasetSplit split_dataset(const std::vector<LabeledExample>& examples, double held_out_fraction,
                           std::uint64_t seed);

}  // namespace adforge::corpus
