#include "adforge/curriculum.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace adforge::curriculum {

using nlohmann::json;
using nlohmann::ordered_json;

double difficulty_score(const corpus::LabeledExample& example,
                        const classifier::ClassifierModel& reference) {
  const double p_ad = classifier::predict_proba(reference, example.query, example.response);
  const double p_true = example.label == 1 ? p_ad : 1.0 - p_ad;
  return std::clamp(1.0 - p_true, 0.0, 1.0);
}

std::vector<ScoredExample> order_curriculum(const std::vector<corpus::LabeledExample>& examples,
                                            const classifier::ClassifierModel& reference) {
  std::vector<ScoredExample> scored;
  scored.reserve(examples.size());
  for (const auto& example : examples) {
    scored.push_back({example, difficulty_score(example, reference)});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredExample& a, const ScoredExample& b) {
                     return a.difficulty < b.difficulty;
                   });
  return scored;
}

namespace {

std::vector<corpus::LabeledExample> expand_to(const std::vector<corpus::LabeledExample>& pool,
                                              std::size_t target) {
  std::vector<corpus::LabeledExample> out;
  out.reserve(target);
  for (std::size_t i = 0; i < target; ++i) out.push_back(pool[i % pool.size()]);
  return out;
}

}  // namespace

std::vector<corpus::LabeledExample> balance_upsample(
    const std::vector<corpus::LabeledExample>& primary,
    const std::vector<corpus::LabeledExample>& secondary) {
  if (primary.empty() || secondary.empty()) {
    throw EmptyInput("balance_upsample needs two nonempty example lists");
  }
  auto combined = primary;
  auto expanded = expand_to(secondary, primary.size());
  combined.insert(combined.end(), std::make_move_iterator(expanded.begin()),
                  std::make_move_iterator(expanded.end()));
  return combined;
}

RecipeCard RecipeCard::preset(const std::string& tag) {
  using corpus::Source;
  RecipeCard card;
  card.tag = tag;
  if (tag == "v0.0") {
    card.sources = {Source::webis};
  } else if (tag == "v0.1") {
    card.sources = {Source::webis, Source::naive_synth};
    card.naive_pool = "single";
  } else if (tag == "v0.2") {
    card.sources = {Source::webis, Source::naive_synth};
  } else if (tag == "v0.3") {
    card.sources = {Source::webis, Source::naive_synth, Source::structured_synth};
  } else if (tag == "v0.4" || tag == "v0.5") {
    card.sources = {Source::webis, Source::naive_synth, Source::structured_synth};
    card.curriculum = true;
    card.reference_tag = "v0.1";
    card.upsample = tag == "v0.5";
  } else {
    throw std::invalid_argument("no recipe preset named " + tag);
  }
  return card;
}

RecipeCard RecipeCard::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingFile("no such recipe: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  RecipeCard card;
  try {
    const auto parsed = json::parse(in);
    card.tag = parsed.at("tag").get<std::string>();
    for (const auto& name : parsed.at("sources")) {
      card.sources.push_back(corpus::source_from_string(name.get<std::string>()));
    }
    card.curriculum = parsed.value("curriculum", false);
    card.upsample = parsed.value("upsample", false);
    card.reference_tag = parsed.value("reference_tag", "");
    card.naive_pool = parsed.value("naive_pool", "full");
  } catch (const json::exception& err) {
    throw SchemaError("recipe " + path.string() + ": " + err.what());
  }
  if (card.tag.empty() || card.sources.empty()) {
    throw SchemaError("recipe " + path.string() + " needs a tag and at least one source");
  }
  return card;
}

void RecipeCard::save(const std::filesystem::path& path) const {
  ordered_json out;
  out["tag"] = tag;
  auto names = ordered_json::array();
  for (const auto source : sources) names.push_back(corpus::to_string(source));
  out["sources"] = std::move(names);
  out["curriculum"] = curriculum;
  out["upsample"] = upsample;
  out["reference_tag"] = reference_tag;
  out["naive_pool"] = naive_pool;

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out.dump(2) << '\n';
  file.flush();
  if (!file) throw IoError("write failed: " + path.string());
}

RecipeOutcome run_recipe(const RecipeCard& card, const SourceDatasets& datasets,
                         const classifier::LogRegConfig& config,
                         const classifier::ClassifierModel* reference) {
  if (card.sources.empty()) throw std::invalid_argument("recipe " + card.tag + " lists no sources");
  if (card.curriculum && (reference == nullptr || reference->vocabulary.size() == 0)) {
    throw MissingReference("curriculum recipe " + card.tag + " needs a trained reference model");
  }

  RecipeOutcome outcome;
  std::vector<corpus::LabeledExample> assembled;
  // Structured data is upsampled to parity with the source listed just before
  // it (the naive set for the presets).
  std::size_t anchor_count = 0;
  for (const auto source : card.sources) {
    const auto found = datasets.find(source);
    if (found == datasets.end() || found->second.empty()) {
      throw MissingSource("recipe " + card.tag + " needs nonempty source " +
                          corpus::to_string(source));
    }
    auto part = found->second;
    if (card.upsample && source == corpus::Source::structured_synth && anchor_count > 0) {
      part = expand_to(part, anchor_count);
    }
    outcome.source_counts[corpus::to_string(source)] = part.size();
    anchor_count = part.size();
    assembled.insert(assembled.end(), part.begin(), part.end());
  }

  corpus::DatasetSplit split;
  split.seed = config.seed;
  auto train_config = config;
  if (card.curriculum) {
    auto ordered = order_curriculum(assembled, *reference);
    split.train.reserve(ordered.size());
    outcome.consumed_difficulties.reserve(ordered.size());
    for (auto& scored : ordered) {
      split.train.push_back(std::move(scored.example));
      outcome.consumed_difficulties.push_back(scored.difficulty);
    }
    train_config.ordered_first_epoch = true;
    outcome.reference_tag = reference->recipe_tag;
  } else {
    split.train = std::move(assembled);
  }

  outcome.model = classifier::train_logreg(split, train_config, &outcome.audit);
  outcome.model.recipe_tag = card.tag;
  outcome.curriculum = card.curriculum;
  return outcome;
}

void write_provenance(const RecipeOutcome& outcome, const std::filesystem::path& path) {
  ordered_json out;
  out["tag"] = outcome.model.recipe_tag;
  ordered_json counts;
  for (const auto& [name, count] : outcome.source_counts) counts[name] = count;
  out["source_counts"] = std::move(counts);
  out["curriculum"] = outcome.curriculum;
  out["reference_tag"] = outcome.reference_tag;
  if (outcome.model.final_train_loss.has_value()) {
    out["final_train_loss"] = *outcome.model.final_train_loss;
  } else {
    out["final_train_loss"] = nullptr;
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out.dump(2) << '\n';
  file.flush();
  if (!file) throw IoError("write failed: " + path.string());
}

}  // namespace adforge::curriculum
