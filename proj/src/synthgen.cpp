#include "adforge/synthgen.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace adforge::synth {

using nlohmann::json;
using nlohmann::ordered_json;

// --- prompt pool ---

const std::vector<std::string>& PromptPool::strategy_tags() {
  static const std::vector<std::string> tags = {"direct", "indirect", "explicit",
                                                "implicit", "hard-sell", "soft-sell"};
  return tags;
}

void PromptPool::add(PooledPrompt prompt) {
  const auto& tags = strategy_tags();
  if (std::find(tags.begin(), tags.end(), prompt.tag) == tags.end()) {
    throw SchemaError("unknown insertion strategy tag: " + prompt.tag);
  }
  const auto& required = prompt.tpl.required_placeholders();
  if (required != std::set<std::string>{"query", "response"}) {
    throw SchemaError("insertion prompt \"" + prompt.tpl.name() +
                      "\" must use exactly the {query} and {response} placeholders");
  }
  prompts_.push_back(std::move(prompt));
}

namespace {

constexpr const char* kInsertionTail =
    "\n\nQuery: {query}\nResponse: {response}\nRewritten response:";

struct AuthoredPrompt {
  const char* name;
  const char* tag;
  const char* body;
};

// Eleven house prompts covering the six insertion strategies; the canonical
// insertion prompt (index 0 of the default pool) lives in prompts.cpp.
const AuthoredPrompt kAuthoredPrompts[] = {
    {"direct-recommendation", "direct",
     "Rewrite the response so it directly recommends a relevant product or service by name. "
     "State the recommendation plainly in one sentence, keep every fact of the original response "
     "intact, and do not use promotional superlatives."},
    {"direct-callout", "direct",
     "Insert a direct call-out for one fitting product into the response. Name the product, say "
     "in one clause what it is best at, and leave the rest of the response unchanged."},
    {"indirect-anecdote", "indirect",
     "Work a short personal-sounding anecdote into the response in which an unnamed acquaintance "
     "solved the same problem with a specific product. Mention the product once, inside the "
     "anecdote only."},
    {"indirect-comparison", "indirect",
     "Extend the response with a brief comparison that casually places one commercial product "
     "among generic alternatives. The product must not open or close the response and must "
     "appear exactly once."},
    {"explicit-offer", "explicit",
     "Append one sentence that openly advertises a relevant product, including a concrete offer "
     "such as a discount, bundle, or trial. Mark no other part of the response as promotional."},
    {"explicit-feature-list", "explicit",
     "Add a short clearly promotional passage that names a product and lists two or three of its "
     "selling points. Integrate the passage where it interrupts the original text least."},
    {"implicit-lifestyle", "implicit",
     "Blend a product mention into the response as part of a lifestyle detail, as if the writer "
     "happened to use it while following their own advice. Avoid any wording that reads as a "
     "pitch."},
    {"hard-sell-urgency", "hard-sell",
     "Rework the response to push a product with urgency: limited stock, an ending deal, or a "
     "reason to act now. Keep the original information correct while making the push "
     "unmistakable."},
    {"hard-sell-superlative", "hard-sell",
     "Rewrite the response so it promotes one product with strong superlatives, calling it the "
     "best choice for the query. The original facts must remain, but the endorsement should "
     "dominate the closing."},
    {"soft-sell-reassurance", "soft-sell",
     "Fold a gentle reassurance into the response that a named product has quietly worked well "
     "for many people in this situation. No urgency, no superlatives, one mention only."},
    {"soft-sell-tip", "soft-sell",
     "Close the response with a friendly practical tip that happens to involve a named product, "
     "phrased as optional advice rather than a sale. Keep the tip under twenty words."},
};

}  // namespace

PromptPool PromptPool::default_pool() {
  PromptPool pool;
  pool.add({gen::prompts::naive_insertion_template(), "implicit"});
  for (const auto& authored : kAuthoredPrompts) {
    pool.add({gen::PromptTemplate(authored.name, std::string(authored.body) + kInsertionTail),
              authored.tag});
  }
  return pool;
}

PromptPool PromptPool::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingFile("no such prompt pool: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json parsed;
  try {
    parsed = json::parse(in);
  } catch (const json::exception& err) {
    throw SchemaError("prompt pool " + path.string() + ": " + err.what());
  }
  if (!parsed.is_array() || parsed.empty()) {
    throw SchemaError("prompt pool " + path.string() + " must be a nonempty JSON list");
  }
  PromptPool pool;
  for (const auto& entry : parsed) {
    std::string name, tag, body;
    try {
      name = entry.at("name").get<std::string>();
      tag = entry.at("tag").get<std::string>();
      body = entry.at("body").get<std::string>();
    } catch (const json::exception& err) {
      throw SchemaError("prompt pool " + path.string() + ": " + err.what());
    }
    pool.add({gen::PromptTemplate(std::move(name), std::move(body)), std::move(tag)});
  }
  return pool;
}

void PromptPool::save(const std::filesystem::path& path) const {
  ordered_json out = ordered_json::array();
  for (const auto& prompt : prompts_) {
    out.push_back({{"name", prompt.tpl.name()}, {"tag", prompt.tag}, {"body", prompt.tpl.body()}});
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out.dump(2) << '\n';
  file.flush();
  if (!file) throw IoError("write failed: " + path.string());
}

// --- naive insertion ---

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex16(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string first_candidate_text(gen::GenerationBackend& backend,
                                 const gen::GenerationRequest& request) {
  auto batch = backend.generate(request);
  if (batch.empty()) throw EmptyCompletion("backend returned no candidates");
  return std::move(batch.front().text);
}

}  // namespace

NaiveExample insert_ad_naive(const std::string& query, const std::string& response,
                             const PromptPool& pool, std::optional<std::size_t> prompt_choice,
                             gen::GenerationBackend& backend, const SynthGenOptions& options) {
  if (pool.size() == 0) throw EmptyInput("prompt pool is empty");
  if (query.empty() || response.empty()) throw MissingField("naive insertion needs query and response");

  std::size_t index;
  if (prompt_choice.has_value()) {
    if (*prompt_choice >= pool.size()) {
      throw std::invalid_argument("prompt_choice " + std::to_string(*prompt_choice) +
                                  " outside pool of " + std::to_string(pool.size()));
    }
    index = *prompt_choice;
  } else {
    if (!options.seed.has_value()) {
      throw MissingSeed("seeded-random prompt choice needs a seed");
    }
    std::mt19937_64 rng(*options.seed);
    index = static_cast<std::size_t>(rng() % pool.size());
  }

  const auto& pooled = pool.at(index);
  gen::GenerationRequest request;
  request.prompt = pooled.tpl.render({{"query", query}, {"response", response}});
  request.temperature = options.temperature;
  request.n = 1;
  request.max_tokens = options.max_tokens;
  request.seed = options.seed;

  auto text = first_candidate_text(backend, request);
  if (text.empty()) throw EmptyCompletion("insertion prompt \"" + pooled.tpl.name() +
                                          "\" produced an empty rewrite");

  NaiveExample result;
  result.example.id =
      "naive-" + hex16(fnv1a(query + '\x1f' + response + '\x1f' + std::to_string(index)));
  result.example.query = query;
  result.example.response = std::move(text);
  result.example.label = 1;
  result.example.source = corpus::Source::naive_synth;
  result.prompt_index = index;
  result.prompt_name = pooled.tpl.name();
  result.prompt_tag = pooled.tag;
  return result;
}

// --- entity sources ---

std::vector<RawEntityPage> FixtureEntitySource::fetch_pages() {
  if (!std::filesystem::exists(path_)) {
    throw SourceUnavailable("entity fixture missing: " + path_.string());
  }
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw SourceUnavailable("cannot open entity fixture: " + path_.string());

  std::vector<RawEntityPage> pages;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RawEntityPage page;
    try {
      const auto parsed = json::parse(line);
      page.page_title = parsed.value("page_title", "");
      page.product_name = parsed.value("product_name", "");
      page.infobox = parsed.value("infobox", "");
      page.raw_text = parsed.value("raw_text", "");
      if (parsed.contains("wikidata_properties")) {
        page.wikidata_properties = parsed.at("wikidata_properties").get<std::vector<std::string>>();
      }
      if (parsed.contains("release_year") && parsed.at("release_year").is_number_integer()) {
        page.release_year = parsed.at("release_year").get<int>();
      }
    } catch (const json::exception&) {
      page = RawEntityPage{};  // malformed line: empty marker page, counted downstream
    }
    pages.push_back(std::move(page));
  }
  return pages;
}

namespace {

std::string url_encode(const std::string& text) {
  static const char* digits = "0123456789ABCDEF";
  std::string out;
  for (const unsigned char c : text) {
    if (std::isalnum(c) != 0 || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(digits[c >> 4]);
      out.push_back(digits[c & 0xF]);
    }
  }
  return out;
}

json get_json(httplib::Client& client, const std::string& path, const std::string& what) {
  auto result = client.Get(path);
  if (!result) {
    throw SourceUnavailable(what + " unreachable: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw SourceUnavailable(what + " answered status " + std::to_string(result->status));
  }
  try {
    return json::parse(result->body);
  } catch (const json::exception& err) {
    throw SourceUnavailable(what + " returned non-JSON: " + err.what());
  }
}

std::pair<std::string, std::string> split_origin(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw SourceUnavailable("wiki base URL must include a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  auto prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

}  // namespace

WikiApiSource::WikiApiSource(std::string wiki_base_url, std::string wikidata_base_url,
                             std::vector<std::string> infoboxes, int timeout_seconds,
                             int page_limit_per_infobox)
    : wiki_base_(std::move(wiki_base_url)),
      wikidata_base_(std::move(wikidata_base_url)),
      infoboxes_(std::move(infoboxes)),
      timeout_seconds_(timeout_seconds),
      page_limit_(page_limit_per_infobox) {}

WikiApiSource WikiApiSource::from_env(std::vector<std::string> infoboxes) {
  std::string wiki = "http://en.wikipedia.org";
  std::string wikidata = "http://www.wikidata.org";
  if (const char* base = std::getenv("ADFORGE_WIKI_BASE_URL")) {
    wiki = base;
    wikidata = base;
  }
  return WikiApiSource(std::move(wiki), std::move(wikidata), std::move(infoboxes));
}

std::vector<RawEntityPage> WikiApiSource::fetch_pages() {
  const auto [wiki_origin, wiki_prefix] = split_origin(wiki_base_);
  const auto [data_origin, data_prefix] = split_origin(wikidata_base_);
  httplib::Client wiki(wiki_origin);
  httplib::Client wikidata(data_origin);
  for (auto* client : {&wiki, &wikidata}) {
    client->set_connection_timeout(timeout_seconds_, 0);
    client->set_read_timeout(timeout_seconds_, 0);
  }

  std::vector<RawEntityPage> pages;
  for (const auto& infobox : infoboxes_) {
    const auto listing = get_json(
        wiki,
        wiki_prefix + "/w/api.php?action=query&list=embeddedin&eititle=" +
            url_encode("Template:Infobox " + infobox) + "&einamespace=0&eilimit=" +
            std::to_string(page_limit_) + "&format=json",
        "wiki page listing");
    if (!listing.contains("query") || !listing.at("query").contains("embeddedin")) continue;

    for (const auto& entry : listing.at("query").at("embeddedin")) {
      RawEntityPage page;
      page.infobox = infobox;
      try {
        page.page_title = entry.at("title").get<std::string>();
        page.product_name = page.page_title;

        const auto detail = get_json(
            wiki,
            wiki_prefix + "/w/api.php?action=query&prop=extracts%7Cpageprops&explaintext=1"
                          "&redirects=1&titles=" +
                url_encode(page.page_title) + "&format=json",
            "wiki page detail");
        std::string qid;
        if (detail.contains("query") && detail.at("query").contains("pages")) {
          for (const auto& [key, body] : detail.at("query").at("pages").items()) {
            page.raw_text = body.value("extract", "");
            if (body.contains("pageprops")) {
              qid = body.at("pageprops").value("wikibase_item", "");
            }
            break;
          }
        }
        if (!qid.empty()) {
          const auto entity = get_json(
              wikidata, data_prefix + "/wiki/Special:EntityData/" + url_encode(qid) + ".json",
              "wikidata entity");
          const auto& claims = entity.at("entities").at(qid).at("claims");
          for (const auto& [property, value] : claims.items()) {
            page.wikidata_properties.push_back(property);
          }
          // Release year: publication date (P577) first, inception (P571)
          // as fallback; values look like "+2021-05-17T00:00:00Z".
          for (const auto* property : {"P577", "P571"}) {
            if (page.release_year.has_value() || !claims.contains(property)) continue;
            const auto& statements = claims.at(property);
            if (!statements.is_array() || statements.empty()) continue;
            const auto time = statements.at(0)
                                  .at("mainsnak")
                                  .at("datavalue")
                                  .at("value")
                                  .value("time", "");
            if (time.size() >= 5) {
              page.release_year = std::atoi(time.substr(1, 4).c_str());
            }
          }
        }
      } catch (const SourceUnavailable&) {
        throw;
      } catch (const std::exception&) {
        page = RawEntityPage{};  // per-page junk: malformed marker
      }
      pages.push_back(std::move(page));
    }
  }
  return pages;
}

// --- harvesting and filtering ---

const std::vector<std::string>& default_infoboxes() {
  static const std::vector<std::string> boxes = {
      "product",       "brand",        "automobile",       "motorcycle",
      "tractor",       "calculator",   "computing device", "keyboard",
      "software",      "camera",       "mobile phone",     "night vision device",
      "synthesizer",   "tool",         "watch",            "pinball",
      "toy",           "film",         "book",             "Asian comic series",
      "comic",         "musical",      "furniture",        "video game",
      "drug"};
  return boxes;
}

const std::vector<std::string>& default_properties() {
  static const std::vector<std::string> properties = {
      "P50",   "P86",   "P110",  "P123",  "P162",  "P170", "P176", "P178", "P179", "P287",
      "P593",  "P676",  "P943",  "P3640", "P4087", "P8731", "P9618", "P9897", "P12969"};
  return properties;
}

HarvestResult harvest_entities(EntitySource& source, const std::vector<std::string>& infoboxes,
                               const std::vector<std::string>& properties) {
  const auto check_subset = [](const std::vector<std::string>& requested,
                               const std::vector<std::string>& allowed, const char* what) {
    for (const auto& name : requested) {
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
        throw std::invalid_argument(std::string(what) + " \"" + name +
                                    "\" is not in the supported set");
      }
    }
    if (requested.empty()) throw std::invalid_argument(std::string(what) + " list is empty");
  };
  check_subset(infoboxes, default_infoboxes(), "infobox");
  check_subset(properties, default_properties(), "property");

  const std::set<std::string> wanted_boxes(infoboxes.begin(), infoboxes.end());
  const std::set<std::string> page_props_wanted(properties.begin(), properties.end());

  HarvestResult result;
  for (auto& page : source.fetch_pages()) {
    if (page.page_title.empty() || page.product_name.empty() || page.infobox.empty()) {
      ++result.skipped_malformed;
      continue;
    }
    if (wanted_boxes.count(page.infobox) == 0) continue;

    std::vector<std::string> matched;
    const std::set<std::string> page_props(page.wikidata_properties.begin(),
                                           page.wikidata_properties.end());
    for (const auto& property : properties) {
      if (page_props.count(property) != 0) matched.push_back(property);
    }
    if (matched.empty()) continue;

    EntityRecord record;
    record.product_name = std::move(page.product_name);
    record.infobox = std::move(page.infobox);
    record.page_title = std::move(page.page_title);
    record.raw_text = std::move(page.raw_text);
    record.release_year = page.release_year.value_or(0);
    record.matched_properties = std::move(matched);
    result.records.push_back(std::move(record));
  }
  return result;
}

std::vector<EntityRecord> filter_entities(const std::vector<EntityRecord>& entities) {
  std::vector<EntityRecord> kept;
  for (const auto& entity : entities) {
    if (entity.release_year >= 2000) kept.push_back(entity);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const EntityRecord& a, const EntityRecord& b) {
    if (a.release_year != b.release_year) return a.release_year > b.release_year;
    return a.product_name < b.product_name;
  });
  return kept;
}

// --- summarization and hard pairs ---

namespace {

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::string truncate_words(const std::string& text, std::size_t limit) {
  std::istringstream words(text);
  std::string word;
  std::string out;
  std::size_t count = 0;
  while (words >> word && count < limit) {
    if (count > 0) out.push_back(' ');
    out += word;
    ++count;
  }
  return out;
}

struct ParsedSummary {
  std::string summary;
  std::vector<std::string> key_features;
};

// Expects "Summary: ..." (possibly wrapped over lines) followed by a
// "Key Features:" section of "- item" lines.
std::optional<ParsedSummary> parse_structured_completion(const std::string& text) {
  std::istringstream lines(text);
  std::string line;
  ParsedSummary parsed;
  bool in_summary = false;
  bool in_features = false;
  while (std::getline(lines, line)) {
    const auto clean = trim(line);
    if (!in_summary && !in_features) {
      if (clean.rfind("Summary:", 0) == 0) {
        parsed.summary = trim(clean.substr(8));
        in_summary = true;
      }
      continue;
    }
    if (in_summary) {
      if (clean == "Key Features:") {
        in_summary = false;
        in_features = true;
        continue;
      }
      if (!clean.empty()) {
        if (!parsed.summary.empty()) parsed.summary.push_back(' ');
        parsed.summary += clean;
      }
      continue;
    }
    // feature section
    if (clean.empty()) continue;
    if (clean.rfind("- ", 0) != 0) break;
    const auto feature = trim(clean.substr(2));
    if (!feature.empty()) parsed.key_features.push_back(feature);
  }

  if (parsed.summary.empty() || parsed.key_features.size() < 3) return std::nullopt;
  if (parsed.key_features.size() > 10) parsed.key_features.resize(10);
  parsed.summary = truncate_words(parsed.summary, 200);
  return parsed;
}

gen::GenerationRequest one_shot_request(std::string prompt, const SynthGenOptions& options,
                                        std::uint64_t seed_offset) {
  gen::GenerationRequest request;
  request.prompt = std::move(prompt);
  request.temperature = options.temperature;
  request.n = 1;
  request.max_tokens = options.max_tokens;
  if (options.seed.has_value()) request.seed = *options.seed + seed_offset;
  return request;
}

bool mentions(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  auto lower = [](std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
  };
  return lower(haystack).find(lower(needle)) != std::string::npos;
}

std::string slug(const std::string& text) {
  std::string out;
  bool pending_dash = false;
  for (const unsigned char c : text) {
    if (std::isalnum(c) != 0) {
      if (pending_dash && !out.empty()) out.push_back('-');
      pending_dash = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    } else {
      pending_dash = true;
    }
  }
  return out.empty() ? "entity" : out;
}

std::string join(const std::vector<std::string>& parts, const std::string& separator) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += separator;
    out += parts[i];
  }
  return out;
}

}  // namespace

EntityRecord summarize_and_extract(const EntityRecord& entity, gen::GenerationBackend& backend,
                                   const SynthGenOptions& options) {
  if (entity.raw_text.empty()) {
    throw MissingField("entity " + entity.page_title + " has no raw page text");
  }
  const auto prompt = gen::prompts::summarize_template().render(
      {{"product_name", entity.product_name},
       {"page_title", entity.page_title},
       {"raw_text", entity.raw_text}});

  for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
    const auto text = first_candidate_text(backend, one_shot_request(prompt, options, attempt));
    if (const auto parsed = parse_structured_completion(text)) {
      EntityRecord filled = entity;
      filled.summary = parsed->summary;
      filled.key_features = parsed->key_features;
      return filled;
    }
  }
  throw ParseError("summarizer output for " + entity.page_title +
                   " was malformed twice (expected Summary/Key Features block)");
}

SynthPair gen_structured_pair(const EntityRecord& entity, gen::GenerationBackend& backend,
                              const SynthGenOptions& options) {
  if (entity.summary.empty() || entity.key_features.empty()) {
    throw MissingField("entity " + entity.page_title + " lacks summary or key features");
  }

  const auto positive_prompt = gen::prompts::hard_positive_template().render(
      {{"infobox_name", entity.infobox},
       {"product_name", entity.product_name},
       {"page_title", entity.page_title},
       {"summary", entity.summary},
       {"key_features", join(entity.key_features, ", ")}});
  const auto negative_prompt = gen::prompts::hard_negative_template().render(
      {{"infobox_name", entity.infobox},
       {"product_name", entity.product_name},
       {"page_title", entity.page_title},
       {"summary", entity.summary}});

  const auto generate_with_mention = [&](const std::string& prompt, std::uint64_t seed_base,
                                         const char* side) {
    for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
      auto text =
          first_candidate_text(backend, one_shot_request(prompt, options, seed_base + attempt));
      if (mentions(text, entity.product_name)) return text;
    }
    throw MissingMention(std::string(side) + " completion for " + entity.page_title +
                         " never mentioned " + entity.product_name);
  };

  const auto base_id = "structured-" + slug(entity.page_title);
  SynthPair pair;
  pair.entity = entity;

  pair.hard_positive.id = base_id + "-pos";
  pair.hard_positive.query = "";
  pair.hard_positive.response = generate_with_mention(positive_prompt, 0, "hard-positive");
  pair.hard_positive.label = 1;
  pair.hard_positive.source = corpus::Source::structured_synth;

  pair.hard_negative.id = base_id + "-neg";
  pair.hard_negative.query = "";
  pair.hard_negative.response = generate_with_mention(negative_prompt, 2, "hard-negative");
  pair.hard_negative.label = 0;
  pair.hard_negative.source = corpus::Source::structured_synth;
  return pair;
}

StructuredPipelineResult run_structured_pipeline(EntitySource& source,
                                                 const std::vector<std::string>& infoboxes,
                                                 const std::vector<std::string>& properties,
                                                 gen::GenerationBackend& backend,
                                                 const SynthGenOptions& options,
                                                 std::size_t max_entities) {
  auto harvest = harvest_entities(source, infoboxes, properties);
  auto kept = filter_entities(harvest.records);

  StructuredPipelineResult result;
  result.harvested = harvest.records.size();
  result.kept_after_filter = kept.size();
  result.skipped_malformed = harvest.skipped_malformed;
  if (max_entities > 0 && kept.size() > max_entities) kept.resize(max_entities);

  for (std::size_t i = 0; i < kept.size(); ++i) {
    auto per_entity = options;
    if (options.seed.has_value()) {
      per_entity.seed = *options.seed + 1000 * (i + 1);
    }
    try {
      const auto enriched = summarize_and_extract(kept[i], backend, per_entity);
      auto pair = gen_structured_pair(enriched, backend, per_entity);
      result.examples.push_back(std::move(pair.hard_positive));
      result.examples.push_back(std::move(pair.hard_negative));
    } catch (const Error&) {
      ++result.failed_entities;
    }
  }
  return result;
}

}  // namespace adforge::synth
