#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "adforge/corpus.hpp"
#include "adforge/errors.hpp"
#include "adforge/generator.hpp"

namespace adforge::synth {

// --- naive pipeline: prompt-pool ad insertion ---

struct PooledPrompt {
  gen::PromptTemplate tpl;
  std::string tag;  // one of the six insertion strategies
};

// Ordered collection of ad-insertion prompts. The default pool carries the
// canonical insertion prompt at index 0 plus eleven repo-authored prompts
// spanning the six strategies; external pools can be swapped in via load().
class PromptPool {
 public:
  static PromptPool default_pool();
  static PromptPool load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  static const std::vector<std::string>& strategy_tags();

  std::size_t size() const { return prompts_.size(); }
  const PooledPrompt& at(std::size_t index) const { return prompts_.at(index); }

  void add(PooledPrompt prompt);

 private:
  std::vector<PooledPrompt> prompts_;
};

struct SynthGenOptions {
  double temperature = 0.7;
  int max_tokens = 512;
  std::optional<std::uint64_t> seed;  // required for stub backends
};

struct NaiveExample {
  corpus::LabeledExample example;  // label 1, source naive_synth
  std::size_t prompt_index = 0;
  std::string prompt_name;
  std::string prompt_tag;
};

// Rewrites an ad-free response through one pool prompt. prompt_choice picks
// the pool index directly; unset means a seeded-random draw (needs a seed).
NaiveExample insert_ad_naive(const std::string& query, const std::string& response,
                             const PromptPool& pool, std::optional<std::size_t> prompt_choice,
                             gen::GenerationBackend& backend, const SynthGenOptions& options);

// --- structured pipeline: entity harvest and hard pairs ---

struct RawEntityPage {
  std::string page_title;
  std::string product_name;
  std::string infobox;
  std::string raw_text;
  std::vector<std::string> wikidata_properties;
  std::optional<int> release_year;
};

class EntitySource {
 public:
  virtual ~EntitySource() = default;
  // Throws SourceUnavailable when the backing store cannot be reached.
  virtual std::vector<RawEntityPage> fetch_pages() = 0;
};

// Local JSONL dump in the documented fixture schema.
class FixtureEntitySource : public EntitySource {
 public:
  explicit FixtureEntitySource(std::filesystem::path path) : path_(std::move(path)) {}
  std::vector<RawEntityPage> fetch_pages() override;

 private:
  std::filesystem::path path_;
};

// Live client speaking the MediaWiki and Wikidata JSON APIs: pages come from
// Template:Infobox transclusions, properties and release year from the
// entity-data claims. ADFORGE_WIKI_BASE_URL points both services at one
// origin (used by tests; the vendored HTTP client has no TLS, so live use
// needs a plain-http endpoint or proxy).
class WikiApiSource : public EntitySource {
 public:
  WikiApiSource(std::string wiki_base_url, std::string wikidata_base_url,
                std::vector<std::string> infoboxes, int timeout_seconds = 30,
                int page_limit_per_infobox = 50);
  static WikiApiSource from_env(std::vector<std::string> infoboxes);

  std::vector<RawEntityPage> fetch_pages() override;

 private:
  std::string wiki_base_;
  std::string wikidata_base_;
  std::vector<std::string> infoboxes_;
  int timeout_seconds_;
  int page_limit_;
};

struct EntityRecord {
  std::string product_name;
  std::string infobox;
  std::string page_title;
  std::string raw_text;
  std::string summary;
  std::vector<std::string> key_features;
  int release_year = 0;  // 0 = unknown, treated as pre-2000
  std::vector<std::string> matched_properties;

  bool operator==(const EntityRecord&) const = default;
};

const std::vector<std::string>& default_infoboxes();   // the 25 product-like infoboxes
const std::vector<std::string>& default_properties();  // the 19 product-ness property ids

struct HarvestResult {
  std::vector<EntityRecord> records;
  std::size_t skipped_malformed = 0;
};

// Keeps pages whose infobox is requested and which carry at least one of the
// requested properties; malformed pages are skipped and counted. Requested
// lists must be subsets of the defaults.
HarvestResult harvest_entities(EntitySource& source, const std::vector<std::string>& infoboxes,
                               const std::vector<std::string>& properties);

// Keeps release_year >= 2000, newest first, ties by product_name.
std::vector<EntityRecord> filter_entities(const std::vector<EntityRecord>& entities);

// Fills summary (truncated to 200 words) and 3-10 key features from one
// structured generation call; one retry on a malformed completion, then
// ParseError.
EntityRecord summarize_and_extract(const EntityRecord& entity, gen::GenerationBackend& backend,
                                   const SynthGenOptions& options);

struct SynthPair {
  corpus::LabeledExample hard_positive;  // label 1
  corpus::LabeledExample hard_negative;  // label 0
  EntityRecord entity;
};

// Renders the hard-positive and hard-negative templates for the entity and
// validates that each completion mentions the product name (one retry, then
// MissingMention).
SynthPair gen_structured_pair(const EntityRecord& entity, gen::GenerationBackend& backend,
                              const SynthGenOptions& options);

struct StructuredPipelineResult {
  std::vector<corpus::LabeledExample> examples;  // pos/neg interleaved per entity
  std::size_t harvested = 0;
  std::size_t kept_after_filter = 0;
  std::size_t skipped_malformed = 0;
  std::size_t failed_entities = 0;  // summarize/pair errors after retries
};

// End-to-end structured pipeline: harvest, filter, summarize, pair.
// max_entities 0 means no cap. Per-entity failures are counted, not fatal.
StructuredPipelineResult run_structured_pipeline(EntitySource& source,
                                                 const std::vector<std::string>& infoboxes,
                                                 const std::vector<std::string>& properties,
                                                 gen::GenerationBackend& backend,
                                                 const SynthGenOptions& options,
                                                 std::size_t max_entities = 0);

}  // namespace adforge::synth
