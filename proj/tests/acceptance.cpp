// Release gate: one self-contained check per shipped guarantee, one PASS or
// FAIL line each, nonzero exit when any check fails its tolerance or budget.

#include <sys/wait.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "adforge/classifier.hpp"
#include "adforge/corpus.hpp"
#include "adforge/curriculum.hpp"
#include "adforge/errors.hpp"
#include "adforge/eval.hpp"
#include "adforge/generator.hpp"
#include "adforge/optimizer.hpp"
#include "adforge/synthgen.hpp"
#include "json.hpp"
#include "testutil.hpp"

using namespace adforge;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;
};

void fail(Check& check, const std::string& message) {
  check.ok = false;
  check.detail << "    " << message << "\n";
}

// --- published leaderboard arithmetic ---

struct PublishedRow {
  const char* run;
  double precision;
  double recall;
  double f1;
};

// Generation and detection leaderboards as printed, three decimals each.
const std::vector<PublishedRow>& generation_rows() {
  static const std::vector<PublishedRow> rows = {
      {"ORPO_Mistral7b_v2", 1.000, 0.721, 0.838},
      {"ORPO_Mistral7b", 0.995, 0.830, 0.905},
      {"Adrewriting-BestOfN", 0.821, 0.858, 0.839},
      {"Qwen2.5 7B V2", 0.960, 0.910, 0.935},
      {"Qwen3 4B V2", 0.984, 0.918, 0.950},
      {"generate-baseline", 0.796, 0.996, 0.885},
  };
  return rows;
}

const std::vector<PublishedRow>& detection_rows() {
  static const std::vector<PublishedRow> rows = {
      {"DebertaFineTuned", 0.788, 0.758, 0.773},
      {"Deberta-Large-V2", 0.983, 0.473, 0.639},
      {"deberta-synthetic-curriculum", 0.945, 0.479, 0.636},
      {"Roberta-Large", 0.985, 0.460, 0.627},
      {"minilm-baseline", 0.728, 0.482, 0.580},
      {"MPnet-finetuned", 0.399, 0.917, 0.556},
      {"Tf-IDF-Logestic-Regression", 0.395, 0.734, 0.514},
      {"Finetuned_MPNET_v2", 0.977, 0.346, 0.511},
      {"Finetuned_MPNET", 0.305, 1.000, 0.467},
      {"naive-bayes-10", 0.307, 0.968, 0.467},
      {"naive-bayes-25", 0.319, 0.638, 0.425},
      {"All-mini-LM-v2-finetuned", 0.664, 0.294, 0.408},
      {"Deberta Large", 0.312, 0.355, 0.332},
      {"naive-bayes-40", 0.367, 0.257, 0.302},
      {"all-mini+Random-forest", 0.341, 0.022, 0.042},
      {"LLM-llama3.1", 0.500, 0.000, 0.001},
  };
  return rows;
}

Check check_f1_reproduction() {
  Check check;
  auto sweep = [&check](const char* table, const std::vector<PublishedRow>& rows) {
    for (const PublishedRow& row : rows) {
      const double recomputed = eval::f1_score(row.precision, row.recall);
      const double diff = std::abs(recomputed - row.f1);
      if (diff > 0.0005) {
        std::ostringstream line;
        line << table << " \"" << row.run << "\": P=" << row.precision << " R=" << row.recall
             << " printed F1=" << row.f1 << " recomputed=" << recomputed << " diff=" << diff;
        fail(check, line.str());
      }
    }
  };
  sweep("generation", generation_rows());
  sweep("detection", detection_rows());
  if (!check.ok) {
    fail(check,
         "the printed F1 values were rounded from unrounded precision/recall, so recomputing "
         "from the printed three-decimal figures cannot always land within 0.0005");
  }
  return check;
}

// --- candidate selection oracle ---

Check check_selection_oracle() {
  Check check;
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    std::vector<gen::Candidate> candidates;
    std::unordered_map<std::string, double> table;
    for (int i = 0; i < n; ++i) {
      std::string text = "cand-" + std::to_string(trial) + "-" + std::to_string(i);
      table[text] = static_cast<double>(rng() % 8) / 8.0;  // coarse grid forces ties
      candidates.push_back({i, std::move(text), "stop", false});
    }
    const auto selection =
        opt::select_best(candidates, [&table](const std::string& text) { return table.at(text); });

    int expected = 0;
    for (int i = 1; i < n; ++i) {
      if (table.at(candidates[static_cast<std::size_t>(i)].text) <
          table.at(candidates[static_cast<std::size_t>(expected)].text))
        expected = i;
    }
    if (selection.chosen_index != expected) {
      fail(check, "trial " + std::to_string(trial) + ": chose index " +
                      std::to_string(selection.chosen_index) + ", linear scan says " +
                      std::to_string(expected));
      return check;
    }
    for (int i = 0; i < n; ++i) {
      if (selection.scores[static_cast<std::size_t>(i)] !=
          table.at(candidates[static_cast<std::size_t>(i)].text)) {
        fail(check, "trial " + std::to_string(trial) + ": score mismatch at index " +
                        std::to_string(i));
        return check;
      }
    }
  }
  return check;
}

// --- best-of-n improvement ---

// Classifier fixture whose vocabulary overlaps the stub generator's word
// list: promotional tokens mark the positive class.
classifier::ClassifierModel train_stub_vocabulary_model() {
  const std::vector<std::string> ad_words = {"premium",  "exclusive", "bargain", "deal",
                                             "offer",    "luxury",    "trusted", "upgrade"};
  const std::vector<std::string> neutral = {"river",   "stone",  "window",  "garden",
                                            "quiet",   "autumn", "pencil",  "journey",
                                            "candle",  "meadow", "harbor",  "violet",
                                            "thunder", "biscuit", "lantern", "orchard"};
  std::mt19937_64 rng(99);
  corpus::DatasetSplit split;
  for (int i = 0; i < 300; ++i) {
    corpus::LabeledExample example;
    example.id = "fx-" + std::to_string(i);
    example.query = "shopping advice thread";
    std::string response;
    for (int w = 0; w < 8; ++w) {
      if (w > 0) response += " ";
      response += neutral[rng() % neutral.size()];
    }
    example.label = i % 2;
    if (example.label == 1) {
      const int plants = 2 + static_cast<int>(rng() % 2);
      for (int p = 0; p < plants; ++p) response += " " + ad_words[rng() % ad_words.size()];
    }
    example.response = std::move(response);
    example.source = corpus::Source::webis;
    split.train.push_back(std::move(example));
  }
  classifier::LogRegConfig config;
  config.seed = 1;
  config.epochs = 25;
  config.l2 = 1e-3;
  return classifier::train_logreg(split, config);
}

Check check_best_of_n_improvement() {
  Check check;
  const auto model = train_stub_vocabulary_model();
  const std::vector<std::string> topics = {"river",  "stone",  "window", "garden",
                                           "quiet",  "autumn", "pencil", "journey"};
  gen::StubBackend backend;

  const int task_count = 220;
  std::vector<double> zero_shot, selected;
  for (int i = 0; i < task_count; ++i) {
    corpus::QueryTask task;
    task.id = "bon-" + std::to_string(i);
    const std::string& topic = topics[static_cast<std::size_t>(i) % topics.size()];
    task.query = "best " + topic + " kit number " + std::to_string(i);
    task.passages.push_back({"p1", "Plain facts about " + topic + " tools.", 1});
    task.passages.push_back({"p2", "More background on " + topic + " upkeep.", 2});
    corpus::AdItem item{"Acme " + topic + " Pro", "product", "reliable, affordable"};

    gen::GenerationRequest base_request;
    base_request.prompt = gen::build_qa_prompt(task, 2);
    base_request.n = 1;
    base_request.temperature = 1.0;
    base_request.max_tokens = 256;
    base_request.seed = 300 + static_cast<std::uint64_t>(i);
    const std::string base = backend.generate(base_request).front().text;

    const auto scorer = [&model, &task](const std::string& text) {
      return classifier::predict_proba(model, task.query, text);
    };

    opt::GenOptions options;
    options.temperature = 1.0;
    options.max_tokens = 256;
    options.seed = 9000 + static_cast<std::uint64_t>(i);

    options.n = 1;
    const auto zero = opt::rewrite_best_of_n(task, base, item, backend, scorer, options);
    options.n = 10;
    const auto best = opt::rewrite_best_of_n(task, base, item, backend, scorer, options);

    zero_shot.push_back(zero.scores[0]);
    selected.push_back(best.scores[static_cast<std::size_t>(best.chosen_index)]);
  }

  const double mean_zero =
      std::accumulate(zero_shot.begin(), zero_shot.end(), 0.0) / zero_shot.size();
  const double mean_selected =
      std::accumulate(selected.begin(), selected.end(), 0.0) / selected.size();
  if (!(mean_selected < mean_zero)) {
    fail(check, "mean selected score " + std::to_string(mean_selected) +
                    " is not strictly below mean zero-shot score " + std::to_string(mean_zero));
  }

  try {
    const auto test = eval::wilcoxon_signed_rank(zero_shot, selected);
    if (!(test.p_value < 0.05)) {
      std::ostringstream line;
      line << "paired two-sided p=" << test.p_value << " is not below 0.05 (n_eff="
           << test.n_effective << ")";
      fail(check, line.str());
    }
  } catch (const Error& e) {
    fail(check, std::string("signed-rank test failed: ") + e.what());
  }
  return check;
}

// --- signed-rank correctness ---

double enumeration_two_sided(const std::vector<double>& a, const std::vector<double>& b,
                             double* w_plus_out) {
  std::vector<double> abs_d, signs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) {
      abs_d.push_back(std::abs(d));
      signs.push_back(d > 0.0 ? 1.0 : -1.0);
    }
  }
  const std::size_t n = abs_d.size();
  std::vector<double> ranks(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (abs_d[j] < abs_d[i]) below += 1.0;
      if (abs_d[j] == abs_d[i]) equal += 1.0;
    }
    ranks[i] = below + (equal + 1.0) / 2.0;
  }
  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (signs[i] > 0.0) w_plus += ranks[i];
  }
  if (w_plus_out != nullptr) *w_plus_out = w_plus;

  const std::uint64_t assignments = 1ULL << n;
  std::uint64_t at_most = 0, at_least = 0;
  const double eps = 1e-9;
  for (std::uint64_t mask = 0; mask < assignments; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1ULL) w += ranks[i];
    }
    if (w <= w_plus + eps) ++at_most;
    if (w >= w_plus - eps) ++at_least;
  }
  const double p_le = static_cast<double>(at_most) / static_cast<double>(assignments);
  const double p_ge = static_cast<double>(at_least) / static_cast<double>(assignments);
  return std::min(1.0, 2.0 * std::min(p_le, p_ge));
}

Check check_signed_rank() {
  Check check;

  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 11);
    std::vector<double> a, b(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      double d = static_cast<double>(rng() % 13) - 6.0;
      if (d == 0.0) d = 1.0;
      a.push_back(d);
    }
    const auto result = eval::wilcoxon_signed_rank(a, b);
    if (result.mode != eval::WilcoxonMode::exact) {
      fail(check, "trial " + std::to_string(trial) + ": expected the exact mode at n=" +
                      std::to_string(n));
      return check;
    }
    double oracle_w_plus = 0.0;
    const double oracle_p = enumeration_two_sided(a, b, &oracle_w_plus);
    if (std::abs(result.w_plus - oracle_w_plus) > 1e-12 ||
        std::abs(result.p_value - oracle_p) > 1e-12) {
      std::ostringstream line;
      line << "trial " << trial << " (n=" << n << "): exact p=" << result.p_value
           << " vs enumeration p=" << oracle_p << ", W+=" << result.w_plus << " vs "
           << oracle_w_plus;
      fail(check, line.str());
      return check;
    }
  }

  // continuous differences at n=25 exercise the approximate branch
  std::mt19937_64 noise_rng(12321);
  std::normal_distribution<double> noise(0.2, 1.0);
  std::vector<double> a(25), b(25, 0.0);
  for (auto& value : a) value = noise(noise_rng);
  const auto approx = eval::wilcoxon_signed_rank(a, b);
  if (approx.mode != eval::WilcoxonMode::normal_approx) {
    fail(check, "expected the normal approximation at n=25");
    return check;
  }

  std::vector<double> abs_d(25);
  for (int i = 0; i < 25; ++i) abs_d[static_cast<std::size_t>(i)] = std::abs(a[i] - b[i]);
  std::vector<std::size_t> order(25);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&abs_d](std::size_t x, std::size_t y) { return abs_d[x] < abs_d[y]; });
  std::vector<double> ranks(25);
  for (std::size_t i = 0; i < order.size(); ++i) ranks[order[i]] = static_cast<double>(i + 1);
  double observed = 0.0;
  for (int i = 0; i < 25; ++i) {
    if (a[i] - b[i] > 0.0) observed += ranks[static_cast<std::size_t>(i)];
  }
  const double mean = 25.0 * 26.0 / 4.0;

  std::mt19937_64 sim_rng(999);
  int extreme = 0;
  const int samples = 200000;
  for (int s = 0; s < samples; ++s) {
    double w = 0.0;
    for (int i = 0; i < 25; ++i) {
      if (sim_rng() & 1ULL) w += ranks[static_cast<std::size_t>(i)];
    }
    if (std::abs(w - mean) >= std::abs(observed - mean)) ++extreme;
  }
  const double mc_p = static_cast<double>(extreme) / samples;
  if (std::abs(approx.p_value - mc_p) >= 0.02) {
    std::ostringstream line;
    line << "normal-approx p=" << approx.p_value << " vs Monte-Carlo p=" << mc_p
         << " differ by " << std::abs(approx.p_value - mc_p);
    fail(check, line.str());
  }
  return check;
}

// --- gradient check ---

Check check_gradient() {
  Check check;
  const std::vector<std::string> words = {"alpha", "beta",  "gamma", "delta", "epsilon",
                                          "zeta",  "eta",   "theta", "iota",  "kappa",
                                          "lambda", "mu",   "nu",    "xi",    "omicron"};
  std::mt19937_64 rng(31);
  std::vector<corpus::LabeledExample> examples;
  for (int i = 0; i < 12; ++i) {
    corpus::LabeledExample example;
    example.id = "g" + std::to_string(i);
    example.query = "probe " + words[rng() % words.size()];
    std::string response;
    for (int w = 0; w < 6; ++w) {
      if (w > 0) response += " ";
      response += words[rng() % words.size()];
    }
    example.response = std::move(response);
    example.label = i % 2;
    example.source = corpus::Source::webis;
    examples.push_back(std::move(example));
  }
  const auto vocab = classifier::build_vocabulary(examples);
  std::vector<classifier::FeatureVector> features;
  std::vector<int> labels;
  for (const auto& example : examples) {
    features.push_back(classifier::featurize(
        classifier::classification_text(example.query, example.response), vocab));
    labels.push_back(example.label);
  }

  const double l2 = 1e-3;
  const double h = 1e-5;
  double max_rel = 0.0;
  auto uniform = [&rng]() { return static_cast<double>(rng() % 2001) / 1000.0 - 1.0; };
  for (int point = 0; point < 10; ++point) {
    Eigen::VectorXd weights(static_cast<Eigen::Index>(vocab.size()));
    for (Eigen::Index j = 0; j < weights.size(); ++j) weights[j] = uniform();
    const double bias = uniform();

    Eigen::VectorXd analytic(weights.size());
    double analytic_bias = 0.0;
    classifier::logreg_objective(features, labels, weights, bias, l2, &analytic, &analytic_bias);

    for (Eigen::Index j = 0; j < weights.size(); ++j) {
      Eigen::VectorXd bumped = weights;
      bumped[j] = weights[j] + h;
      const double up = classifier::logreg_objective(features, labels, bumped, bias, l2);
      bumped[j] = weights[j] - h;
      const double down = classifier::logreg_objective(features, labels, bumped, bias, l2);
      const double fd = (up - down) / (2.0 * h);
      const double rel =
          std::abs(analytic[j] - fd) / std::max({1e-8, std::abs(fd), std::abs(analytic[j])});
      max_rel = std::max(max_rel, rel);
    }
    const double up = classifier::logreg_objective(features, labels, weights, bias + h, l2);
    const double down = classifier::logreg_objective(features, labels, weights, bias - h, l2);
    const double fd_bias = (up - down) / (2.0 * h);
    const double rel = std::abs(analytic_bias - fd_bias) /
                       std::max({1e-8, std::abs(fd_bias), std::abs(analytic_bias)});
    max_rel = std::max(max_rel, rel);
  }
  if (max_rel > 1e-4) {
    std::ostringstream line;
    line << "max relative error " << max_rel << " exceeds 1e-4";
    fail(check, line.str());
  }
  return check;
}

// --- recipe and curriculum audit ---

corpus::LabeledExample recipe_example(std::string id, corpus::Source source, int label,
                                      const std::string& extra) {
  corpus::LabeledExample example;
  example.id = std::move(id);
  example.query = "question about " + extra;
  example.response = label == 1 ? "buy the amazing discount product today, a sponsored pick " + extra
                                : "a neutral factual answer with plain details " + extra;
  example.label = label;
  example.source = source;
  return example;
}

curriculum::SourceDatasets recipe_datasets() {
  curriculum::SourceDatasets datasets;
  for (int i = 0; i < 10; ++i)
    datasets[corpus::Source::webis].push_back(recipe_example(
        "w" + std::to_string(i), corpus::Source::webis, i % 2, "webis topic " + std::to_string(i)));
  for (int i = 0; i < 4; ++i)
    datasets[corpus::Source::naive_synth].push_back(
        recipe_example("n" + std::to_string(i), corpus::Source::naive_synth, 1,
                       "inserted ad " + std::to_string(i)));
  for (int i = 0; i < 3; ++i)
    datasets[corpus::Source::structured_synth].push_back(
        recipe_example("s" + std::to_string(i), corpus::Source::structured_synth, i == 1 ? 0 : 1,
                       "product entity " + std::to_string(i)));
  return datasets;
}

Check check_recipe_audit() {
  Check check;
  const auto datasets = recipe_datasets();
  classifier::LogRegConfig config;
  config.seed = 7;
  config.epochs = 15;

  const auto reference =
      curriculum::run_recipe(curriculum::RecipeCard::preset("v0.1"), datasets, config);

  const auto ordered = curriculum::run_recipe(curriculum::RecipeCard::preset("v0.4"), datasets,
                                              config, &reference.model);
  if (ordered.consumed_difficulties.size() != 17) {
    fail(check, "expected 17 first-epoch difficulties, saw " +
                    std::to_string(ordered.consumed_difficulties.size()));
  }
  for (std::size_t i = 1; i < ordered.consumed_difficulties.size(); ++i) {
    if (ordered.consumed_difficulties[i] + 1e-12 < ordered.consumed_difficulties[i - 1]) {
      std::ostringstream line;
      line << "difficulty decreased at position " << i << ": "
           << ordered.consumed_difficulties[i - 1] << " -> " << ordered.consumed_difficulties[i];
      fail(check, line.str());
      break;
    }
  }

  const auto balanced = curriculum::run_recipe(curriculum::RecipeCard::preset("v0.5"), datasets,
                                               config, &reference.model);
  const auto naive_count = balanced.source_counts.at("naive_synth");
  const auto structured_count = balanced.source_counts.at("structured_synth");
  if (naive_count != structured_count) {
    fail(check, "post-upsample counts differ: naive_synth=" + std::to_string(naive_count) +
                    " structured_synth=" + std::to_string(structured_count));
  }
  return check;
}

// --- structured synthesis determinism and validity ---

Check check_structured_synthesis() {
  Check check;
  testutil::TempDir scratch;
  gen::StubBackend backend;
  synth::SynthGenOptions options;
  options.temperature = 0.7;
  options.max_tokens = 256;
  options.seed = 2;

  auto run_once = [&](const std::string& name) {
    synth::FixtureEntitySource source(testutil::fixture("entities_10.jsonl"));
    auto result = synth::run_structured_pipeline(source, synth::default_infoboxes(),
                                                 synth::default_properties(), backend, options);
    corpus::write_jsonl(result.examples, scratch.file(name));
    return result;
  };
  const auto first = run_once("first.jsonl");
  const auto second = run_once("second.jsonl");
  if (testutil::read_file(scratch.file("first.jsonl")) !=
      testutil::read_file(scratch.file("second.jsonl"))) {
    fail(check, "two identically seeded runs differ byte for byte");
  }

  synth::FixtureEntitySource source(testutil::fixture("entities_10.jsonl"));
  const auto harvest =
      synth::harvest_entities(source, synth::default_infoboxes(), synth::default_properties());
  const auto kept = synth::filter_entities(harvest.records);
  for (const auto& record : kept) {
    if (record.release_year < 2000) {
      fail(check,
           "filter kept pre-2000 entity " + record.product_name + " (" +
               std::to_string(record.release_year) + ")");
    }
  }
  if (kept.size() != 7) {
    fail(check, "expected 7 entities after the year filter, saw " + std::to_string(kept.size()));
  }

  auto lowercase = [](std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
  };
  if (first.examples.size() != 2 * kept.size()) {
    fail(check, "expected " + std::to_string(2 * kept.size()) + " paired examples, saw " +
                    std::to_string(first.examples.size()));
  } else {
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const std::string needle = lowercase(kept[i].product_name);
      for (std::size_t side = 0; side < 2; ++side) {
        const auto& example = first.examples[2 * i + side];
        if (lowercase(example.response).find(needle) == std::string::npos) {
          fail(check, "example " + example.id + " does not mention " + kept[i].product_name);
        }
      }
    }
  }
  return check;
}

// --- prompt goldens ---

Check check_prompt_goldens() {
  Check check;
  auto compare = [&check](const std::string& name, const std::string& actual) {
    const auto path = testutil::golden(name);
    if (!fs::exists(path)) {
      fail(check, "missing golden file " + path.string());
      return;
    }
    if (testutil::read_file(path) != actual) fail(check, "rendering differs from " + name);
  };

  corpus::QueryTask task;
  task.id = "corvette";
  task.query = "corvette z06";
  task.passages.push_back(
      {"d1", "The 2023 Corvette Z06 pairs a flat-plane-crank V8 with a track-tuned chassis.", 1});
  task.passages.push_back(
      {"d2", "Its 5.5-litre LT6 engine revs to 8,600 rpm and makes 670 horsepower.", 2});
  compare("qa_prompt.txt", gen::build_qa_prompt(task, 5));

  const corpus::AdItem item{"AcmeCam X", "camera", "lightweight, sharp"};
  compare("rewrite_prompt.txt",
          gen::build_rewrite_prompt(
              "best lightweight camera for hiking",
              "Mirrorless bodies keep weight down; pair one with a compact zoom for trail photography.",
              item));

  compare("naive_insertion_prompt.txt", gen::prompts::naive_insertion_template().body());
  compare("hard_positive_prompt.txt", gen::prompts::hard_positive_template().body());
  compare("hard_negative_prompt.txt", gen::prompts::hard_negative_template().body());
  return check;
}

// --- offline end-to-end run ---

int run_cli(const std::string& args, const testutil::TempDir& scratch) {
  const std::string command = std::string(ADFORGE_CLI_PATH) + " " + args + " >" +
                              scratch.file("cli-stdout.txt").string() + " 2>" +
                              scratch.file("cli-stderr.txt").string();
  const int raw = std::system(command.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::size_t count_lines(const fs::path& path) {
  std::istringstream in(testutil::read_file(path));
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++count;
  }
  return count;
}

Check check_end_to_end() {
  Check check;
  testutil::TempDir scratch;

  std::vector<corpus::LabeledExample> labeled;
  for (int i = 0; i < 10; ++i)
    labeled.push_back(recipe_example("w" + std::to_string(i), corpus::Source::webis, i % 2,
                                     "webis topic " + std::to_string(i)));
  for (int i = 0; i < 4; ++i)
    labeled.push_back(recipe_example("n" + std::to_string(i), corpus::Source::naive_synth, 1,
                                     "inserted ad " + std::to_string(i)));
  const fs::path train_path = scratch.file("train.jsonl");
  corpus::write_jsonl(labeled, train_path);

  const std::string topics = testutil::fixture("topics_50.jsonl").string();
  const fs::path model_dir = scratch.file("model");
  const fs::path work = scratch.file("work");
  const fs::path scored_base = scratch.file("scored_base");
  const fs::path scored_best = scratch.file("scored_best");

  struct Step {
    const char* name;
    std::string args;
  };
  const std::string model = (model_dir / "model.json").string();
  const std::vector<Step> steps = {
      {"train", "train --labeled " + train_path.string() + " --recipe v0.1 --seed 11 --output-dir " +
                    model_dir.string()},
      {"qa", "qa --stub --seed 3 --topics " + topics + " --output-dir " + work.string()},
      {"rewrite", "rewrite --stub --seed 7 --n 10 --topics " + topics + " --responses " +
                      (work / "responses.jsonl").string() + " --model " + model +
                      " --output-dir " + work.string()},
      {"classify-base", "classify --model " + model + " --input " +
                            (work / "responses.jsonl").string() + " --output-dir " +
                            scored_base.string()},
      {"classify-best", "classify --model " + model + " --input " +
                            (work / "candidates.jsonl").string() + " --output-dir " +
                            scored_best.string()},
  };
  for (const Step& step : steps) {
    const int code = run_cli(step.args, scratch);
    if (code != 0) {
      fail(check, std::string(step.name) + " exited with code " + std::to_string(code) + ": " +
                      testutil::read_file(scratch.file("cli-stderr.txt")));
      return check;
    }
  }

  if (count_lines(work / "responses.jsonl") != 50) {
    fail(check, "expected 50 qa responses");
    return check;
  }
  if (count_lines(work / "candidates.jsonl") != 50) {
    fail(check, "expected 50 rewritten tasks");
    return check;
  }

  json config{{"output_dir", scratch.file("report").string()},
              {"threshold", 0.5},
              {"matrix",
               json::array({{{"method", "qa-baseline"},
                             {"temperature", 1.0},
                             {"classifier", "v0.1"},
                             {"scores", (scored_base / "scores.jsonl").string()}},
                            {{"method", "best-of-n"},
                             {"temperature", 1.0},
                             {"classifier", "v0.1"},
                             {"scores", (scored_best / "scores.jsonl").string()}}})}};
  testutil::write_file(scratch.file("eval.json"), config.dump(2));
  const int code = run_cli("evaluate --config " + scratch.file("eval.json").string(), scratch);
  if (code != 0) {
    fail(check, "evaluate exited with code " + std::to_string(code) + ": " +
                    testutil::read_file(scratch.file("cli-stderr.txt")));
    return check;
  }

  const auto report = json::parse(testutil::read_file(scratch.file("report") / "report.json"));
  const auto& matrix = report.at("matrix");
  if (matrix.at("rows").size() != 2 || matrix.at("columns") != json::array({"v0.1"})) {
    fail(check, "detection matrix shape is not 2 rows by the v0.1 column");
    return check;
  }
  for (const auto& row : matrix.at("cells")) {
    for (const auto& cell : row) {
      const double value = cell.get<double>();
      if (!(value >= 0.0 && value <= 1.0)) {
        fail(check, "matrix cell " + std::to_string(value) + " outside [0, 1]");
        return check;
      }
    }
  }
  const std::string text = testutil::read_file(scratch.file("report") / "report.txt");
  if (text.find("Ad detection accuracy") == std::string::npos) {
    fail(check, "text report is missing the accuracy table");
  }
  return check;
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Check()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"published-f1-reproduction", 1.0, check_f1_reproduction},
      {"best-candidate-selection-oracle", 5.0, check_selection_oracle},
      {"best-of-n-score-improvement", 60.0, check_best_of_n_improvement},
      {"signed-rank-test-correctness", 60.0, check_signed_rank},
      {"logreg-gradient-check", 5.0, check_gradient},
      {"recipe-curriculum-audit", 30.0, check_recipe_audit},
      {"structured-synthesis-determinism", 10.0, check_structured_synthesis},
      {"prompt-golden-fidelity", 1.0, check_prompt_goldens},
      {"offline-end-to-end-run", 120.0, check_end_to_end},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& criterion = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criterion.run();
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail << "    unhandled exception: " << e.what() << "\n";
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > criterion.budget_seconds) {
      check.ok = false;
      check.detail << "    exceeded the " << criterion.budget_seconds << "s budget\n";
    }
    std::cout << (check.ok ? "[PASS] " : "[FAIL] ") << (i + 1) << ". " << criterion.name << " ("
              << std::fixed << std::setprecision(2) << elapsed << "s)\n"
              << std::defaultfloat << std::setprecision(6);
    if (!check.ok) {
      std::cout << check.detail.str();
      ++failures;
    }
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << " of " << criteria.size()
            << " checks passed\n";
  return failures == 0 ? 0 : 1;
}
