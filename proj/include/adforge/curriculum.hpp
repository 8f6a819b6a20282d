#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "adforge/classifier.hpp"
#include "adforge/corpus.hpp"
#include "adforge/errors.hpp"

namespace adforge::curriculum {

struct ScoredExample {
  corpus::LabeledExample example;
  double difficulty = 0.0;  // 1 - p_ref(true label), in [0,1]
};

// How hard the reference model finds the example: 0 for a confidently correct
// reference, 1 for a confidently wrong one, 0.5 for a know-nothing model.
double difficulty_score(const corpus::LabeledExample& example,
                        const classifier::ClassifierModel& reference);

// Easy-to-hard ordering, stable by original position on ties. The result is a
// permutation of the input.
std::vector<ScoredExample> order_curriculum(const std::vector<corpus::LabeledExample>& examples,
                                            const classifier::ClassifierModel& reference);

// Repeats secondary floor(|primary|/|secondary|) times plus a prefix so both
// sides contribute exactly |primary| examples, then returns primary followed
// by the expanded secondary. Deterministic, no randomness involved.
std::vector<corpus::LabeledExample> balance_upsample(
    const std::vector<corpus::LabeledExample>& primary,
    const std::vector<corpus::LabeledExample>& secondary);

// A training recipe: which sources go in, whether the first epoch follows the
// curriculum order, and whether structured data is upsampled to parity with
// the source listed just before it (the naive set for the presets).
struct RecipeCard {
  std::string tag;
  std::vector<corpus::Source> sources;
  bool curriculum = false;
  bool upsample = false;
  std::string reference_tag;        // recipe expected to supply the difficulty reference
  std::string naive_pool = "full";  // "single" or "full" insertion prompt pool

  static RecipeCard preset(const std::string& tag);  // v0.0 through v0.5
  static RecipeCard load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool operator==(const RecipeCard&) const = default;
};

using SourceDatasets = std::map<corpus::Source, std::vector<corpus::LabeledExample>>;

struct RecipeOutcome {
  classifier::ClassifierModel model;
  std::map<std::string, std::size_t> source_counts;  // post-upsample, keyed by source name
  bool curriculum = false;
  std::string reference_tag;  // recipe_tag of the reference actually used
  std::vector<double> consumed_difficulties;  // first-epoch difficulties, curriculum runs only
  classifier::TrainAudit audit;
};

// Trains the recipe's model over the listed sources. Curriculum recipes need
// a trained reference model (MissingReference otherwise); sources absent from
// the dataset map raise MissingSource.
RecipeOutcome run_recipe(const RecipeCard& card, const SourceDatasets& datasets,
                         const classifier::LogRegConfig& config,
                         const classifier::ClassifierModel* reference = nullptr);

// JSON provenance: {tag, source_counts, curriculum, reference_tag,
// final_train_loss}.
void write_provenance(const RecipeOutcome& outcome, const std::filesystem::path& path);

}  // namespace adforge::curriculum
