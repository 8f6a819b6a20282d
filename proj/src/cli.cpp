#include "adforge/cli.hpp"

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "adforge/classifier.hpp"
#include "adforge/corpus.hpp"
#include "adforge/curriculum.hpp"
#include "adforge/errors.hpp"
#include "adforge/eval.hpp"
#include "adforge/optimizer.hpp"
#include "adforge/synthgen.hpp"

namespace adforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json read_json_file(const fs::path& path) {
  if (!fs::exists(path)) throw MissingFile("config file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path.string());
  json parsed;
  try {
    in >> parsed;
  } catch (const json::exception& e) {
    throw SchemaError("config is not valid JSON: " + path.string() + ": " + e.what());
  }
  if (!parsed.is_object()) throw SchemaError("config root must be a JSON object: " + path.string());
  return parsed;
}

template <typename T>
void read_field(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("config field has the wrong type: ") + key);
  }
}

void read_path_field(const json& obj, const char* key, fs::path& target) {
  std::string value;
  if (!obj.contains(key)) return;
  read_field(obj, key, value);
  target = value;
}

std::string require_string(const json& obj, const char* key, const char* where) {
  if (!obj.contains(key) || !obj.at(key).is_string())
    throw SchemaError(std::string(where) + " entries need a string \"" + key + "\" field");
  return obj.at(key).get<std::string>();
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  RunConfig cfg;
  const json obj = read_json_file(path);

  read_path_field(obj, "topics", cfg.topics);
  read_path_field(obj, "labeled", cfg.labeled);
  read_path_field(obj, "entities", cfg.entities);
  read_path_field(obj, "responses", cfg.responses);
  read_path_field(obj, "input", cfg.input);
  read_path_field(obj, "model", cfg.model_path);
  read_path_field(obj, "reference_model", cfg.reference_model);
  read_path_field(obj, "pool", cfg.pool);
  read_path_field(obj, "output_dir", cfg.output_dir);

  read_field(obj, "recipe", cfg.recipe);
  read_field(obj, "top_k", cfg.top_k);
  read_field(obj, "n", cfg.n);
  read_field(obj, "max_tokens", cfg.max_tokens);
  read_field(obj, "epochs", cfg.epochs);
  read_field(obj, "prompt_index", cfg.prompt_index);
  read_field(obj, "max_entities", cfg.max_entities);
  read_field(obj, "temperature", cfg.temperature);
  read_field(obj, "threshold", cfg.threshold);
  read_field(obj, "seed", cfg.seed);
  read_field(obj, "stub", cfg.stub);

  if (obj.contains("endpoint")) {
    const json& endpoint = obj.at("endpoint");
    if (!endpoint.is_object()) throw SchemaError("config field endpoint must be an object");
    read_field(endpoint, "base_url", cfg.endpoint.base_url);
    read_field(endpoint, "api_key", cfg.endpoint.api_key);
    read_field(endpoint, "model", cfg.endpoint.model);
    read_field(endpoint, "timeout_seconds", cfg.endpoint.timeout_seconds);
    read_field(endpoint, "max_in_flight", cfg.endpoint.max_in_flight);
  }

  if (obj.contains("matrix")) {
    if (!obj.at("matrix").is_array()) throw SchemaError("config field matrix must be a list");
    for (const json& entry : obj.at("matrix")) {
      if (!entry.is_object()) throw SchemaError("matrix entries must be objects");
      MatrixCellSpec cell;
      cell.method = require_string(entry, "method", "matrix");
      cell.classifier = require_string(entry, "classifier", "matrix");
      cell.scores = require_string(entry, "scores", "matrix");
      read_field(entry, "temperature", cell.temperature);
      cfg.matrix.push_back(std::move(cell));
    }
  }

  if (obj.contains("wilcoxon")) {
    if (!obj.at("wilcoxon").is_array()) throw SchemaError("config field wilcoxon must be a list");
    for (const json& entry : obj.at("wilcoxon")) {
      if (!entry.is_object()) throw SchemaError("wilcoxon entries must be objects");
      WilcoxonSpec spec;
      spec.label = require_string(entry, "label", "wilcoxon");
      spec.a = require_string(entry, "a", "wilcoxon");
      spec.b = require_string(entry, "b", "wilcoxon");
      cfg.wilcoxon.push_back(std::move(spec));
    }
  }

  return cfg;
}

namespace {

// Raw flag storage for one subcommand; merged over the config file after
// parsing so explicit flags always win.
struct CliValues {
  std::string config;
  std::string topics, labeled, entities, responses, input, model, reference, pool, output_dir;
  std::string recipe, alternative = "two_sided", a, b;
  int top_k = 5, n = 10, max_tokens = 512, epochs = 40, prompt_index = -1;
  std::uint64_t seed = 0, max_entities = 0;
  double temperature = 1.0, threshold = 0.5;
  bool stub = false;
};

bool flag_given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* option = cmd->get_option_no_throw(name);
  return option != nullptr && option->count() > 0;
}

RunConfig resolve(const CLI::App* cmd, const CliValues& v) {
  RunConfig cfg;
  if (flag_given(cmd, "--config")) cfg = load_run_config(v.config);

  auto path_flag = [&](const char* name, const std::string& value, fs::path& target) {
    if (flag_given(cmd, name)) target = value;
  };
  path_flag("--topics", v.topics, cfg.topics);
  path_flag("--labeled", v.labeled, cfg.labeled);
  path_flag("--entities", v.entities, cfg.entities);
  path_flag("--responses", v.responses, cfg.responses);
  path_flag("--input", v.input, cfg.input);
  path_flag("--model", v.model, cfg.model_path);
  path_flag("--reference", v.reference, cfg.reference_model);
  path_flag("--pool", v.pool, cfg.pool);
  path_flag("--output-dir", v.output_dir, cfg.output_dir);

  if (flag_given(cmd, "--recipe")) cfg.recipe = v.recipe;
  if (flag_given(cmd, "--top-k")) cfg.top_k = v.top_k;
  if (flag_given(cmd, "--n")) cfg.n = v.n;
  if (flag_given(cmd, "--max-tokens")) cfg.max_tokens = v.max_tokens;
  if (flag_given(cmd, "--epochs")) cfg.epochs = v.epochs;
  if (flag_given(cmd, "--prompt-index")) cfg.prompt_index = v.prompt_index;
  if (flag_given(cmd, "--max-entities")) cfg.max_entities = static_cast<std::size_t>(v.max_entities);
  if (flag_given(cmd, "--temperature")) cfg.temperature = v.temperature;
  if (flag_given(cmd, "--threshold")) cfg.threshold = v.threshold;
  if (flag_given(cmd, "--seed")) cfg.seed = v.seed;
  if (v.stub) cfg.stub = true;
  return cfg;
}

fs::path prepare_output_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.output_dir.string());
  return cfg.output_dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file: " + path.string());
  return out;
}

void require_path(const fs::path& path, const char* what) {
  if (path.empty()) throw SchemaError(std::string(what) + " is required, via flag or config");
}

std::unique_ptr<gen::GenerationBackend> make_backend(const RunConfig& cfg) {
  if (cfg.stub) return std::make_unique<gen::StubBackend>();
  return std::make_unique<gen::HttpBackend>(gen::LlmEndpointConfig::from_env(cfg.endpoint));
}

std::vector<json> read_jsonl(const fs::path& path) {
  if (!fs::exists(path)) throw MissingFile("input file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path.string());
  std::vector<json> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      lines.push_back(json::parse(line));
    } catch (const json::exception&) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON line");
    }
  }
  return lines;
}

// Accepts bare numbers or {"score": ...} objects, one per line.
std::vector<double> read_scores(const fs::path& path) {
  std::vector<double> scores;
  for (const json& line : read_jsonl(path)) {
    if (line.is_number()) {
      scores.push_back(line.get<double>());
    } else if (line.is_object() && line.contains("score") && line.at("score").is_number()) {
      scores.push_back(line.at("score").get<double>());
    } else {
      throw SchemaError("score lines must be numbers or objects with a numeric \"score\": " +
                        path.string());
    }
  }
  return scores;
}

opt::Scorer model_scorer(const classifier::ClassifierModel& model, std::string query) {
  return [&model, query = std::move(query)](const std::string& response) {
    return classifier::predict_proba(model, query, response);
  };
}

std::map<std::string, std::string> load_responses(const fs::path& path) {
  std::map<std::string, std::string> responses;
  for (const json& line : read_jsonl(path)) {
    if (!line.is_object() || !line.contains("task_id") || !line.contains("response"))
      throw SchemaError("response lines need task_id and response fields: " + path.string());
    responses[line.at("task_id").get<std::string>()] = line.at("response").get<std::string>();
  }
  return responses;
}

void run_qa(const RunConfig& cfg) {
  require_path(cfg.topics, "a topics file (--topics)");
  auto tasks = corpus::load_topics(cfg.topics);
  auto backend = make_backend(cfg);
  const fs::path out_dir = prepare_output_dir(cfg);
  const fs::path out_path = out_dir / "responses.jsonl";
  auto out = open_output(out_path);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const corpus::QueryTask& task = tasks[i];
    gen::GenerationRequest request;
    request.prompt = gen::build_qa_prompt(task, cfg.top_k);
    request.n = 1;
    request.temperature = cfg.temperature;
    request.max_tokens = cfg.max_tokens;
    request.seed = cfg.seed + i;
    auto candidates = backend->generate(request);
    ordered_json record{
        {"task_id", task.id}, {"query", task.query}, {"response", candidates.front().text}};
    out << record.dump() << "\n";
  }
  std::cout << "answered " << tasks.size() << " queries -> " << out_path.string() << "\n";
}

void run_rewrite(const RunConfig& cfg) {
  require_path(cfg.topics, "a topics file (--topics)");
  const fs::path out_dir = prepare_output_dir(cfg);
  const fs::path responses_path =
      cfg.responses.empty() ? out_dir / "responses.jsonl" : cfg.responses;
  auto tasks = corpus::load_topics(cfg.topics);
  auto base_responses = load_responses(responses_path);

  std::optional<classifier::ClassifierModel> model;
  if (!cfg.model_path.empty()) model = classifier::restore_model(cfg.model_path);
  if (cfg.n > 1 && !model)
    throw SchemaError("best-of-n rewriting needs --model for candidate scoring");

  auto backend = make_backend(cfg);
  const fs::path out_path = out_dir / "candidates.jsonl";
  auto out = open_output(out_path);
  std::size_t written = 0, skipped = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const corpus::QueryTask& task = tasks[i];
    auto found = base_responses.find(task.id);
    if (task.items.empty() || found == base_responses.end()) {
      ++skipped;
      continue;
    }
    opt::Scorer scorer;
    if (model) {
      scorer = model_scorer(*model, task.query);
    } else {
      scorer = [](const std::string&) { return 0.0; };
    }
    opt::GenOptions options;
    options.n = cfg.n;
    options.temperature = cfg.temperature;
    options.max_tokens = cfg.max_tokens;
    options.seed = cfg.seed + i;
    auto set = opt::rewrite_best_of_n(task, found->second, task.items.front(), *backend, scorer,
                                      options);
    ordered_json texts = ordered_json::array();
    for (const gen::Candidate& candidate : set.candidates) texts.push_back(candidate.text);
    ordered_json record{{"task_id", task.id},
                        {"query", task.query},
                        {"item", task.items.front().item},
                        {"base_response", found->second},
                        {"candidates", texts},
                        {"scores", set.scores},
                        {"chosen_index", set.chosen_index},
                        {"rewritten", set.chosen().text}};
    out << record.dump() << "\n";
    ++written;
  }
  std::cout << "rewrote " << written << " tasks, skipped " << skipped << " -> "
            << out_path.string() << "\n";
}

void run_build_sft(const RunConfig& cfg) {
  require_path(cfg.topics, "a topics file (--topics)");
  require_path(cfg.model_path, "a classifier model (--model)");
  if (cfg.n < 2) throw SchemaError("build-sft needs n >= 2 candidate draws");
  const fs::path out_dir = prepare_output_dir(cfg);
  const fs::path responses_path =
      cfg.responses.empty() ? out_dir / "responses.jsonl" : cfg.responses;
  auto tasks = corpus::load_topics(cfg.topics);
  auto base_responses = load_responses(responses_path);
  auto model = classifier::restore_model(cfg.model_path);
  auto backend = make_backend(cfg);
  std::vector<opt::BackendChoice> backends{{backend.get(), cfg.temperature}};

  std::vector<opt::SftRecord> records;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const corpus::QueryTask& task = tasks[i];
    auto found = base_responses.find(task.id);
    if (task.items.empty() || found == base_responses.end()) {
      ++skipped;
      continue;
    }
    opt::GenOptions options;
    options.max_tokens = cfg.max_tokens;
    options.seed = cfg.seed + i;
    records.push_back(opt::build_sft_record(task.query, found->second, task.items.front(),
                                            backends, model_scorer(model, task.query), cfg.n,
                                            options));
  }
  const fs::path out_path = out_dir / "sft.jsonl";
  std::size_t count = opt::emit_sft_dataset(records, out_path);
  std::cout << "wrote " << count << " sft records, skipped " << skipped << " tasks -> "
            << out_path.string() << "\n";
}

void run_synth_naive(const RunConfig& cfg) {
  require_path(cfg.labeled, "an ad-free labeled file (--labeled)");
  auto examples = corpus::load_labeled(cfg.labeled);
  auto pool = cfg.pool.empty() ? synth::PromptPool::default_pool() : synth::PromptPool::load(cfg.pool);
  if (cfg.prompt_index >= 0 && static_cast<std::size_t>(cfg.prompt_index) >= pool.size())
    throw SchemaError("prompt_index out of range for a pool of " + std::to_string(pool.size()));
  auto backend = make_backend(cfg);
  const fs::path out_dir = prepare_output_dir(cfg);

  std::vector<corpus::LabeledExample> generated;
  std::vector<ordered_json> audit;
  std::size_t index = 0;
  for (const corpus::LabeledExample& example : examples) {
    if (example.label != 0) continue;
    synth::SynthGenOptions options;
    options.temperature = cfg.temperature;
    options.max_tokens = cfg.max_tokens;
    options.seed = cfg.seed + index;
    std::optional<std::size_t> choice;
    if (cfg.prompt_index >= 0) choice = static_cast<std::size_t>(cfg.prompt_index);
    auto result = synth::insert_ad_naive(example.query, example.response, pool, choice, *backend,
                                         options);
    audit.push_back(ordered_json{{"id", result.example.id},
                                 {"source_id", example.id},
                                 {"prompt_index", result.prompt_index},
                                 {"prompt_name", result.prompt_name},
                                 {"prompt_tag", result.prompt_tag}});
    generated.push_back(std::move(result.example));
    ++index;
  }
  const fs::path out_path = out_dir / "naive.jsonl";
  corpus::write_jsonl(generated, out_path);
  auto audit_out = open_output(out_dir / "naive.audit.jsonl");
  for (const ordered_json& line : audit) audit_out << line.dump() << "\n";
  std::cout << "generated " << generated.size() << " naive ad insertions -> " << out_path.string()
            << "\n";
}

void run_synth_structured(const RunConfig& cfg) {
  auto backend = make_backend(cfg);
  const fs::path out_dir = prepare_output_dir(cfg);
  synth::SynthGenOptions options;
  options.temperature = cfg.temperature;
  options.max_tokens = cfg.max_tokens;
  options.seed = cfg.seed;

  synth::StructuredPipelineResult result;
  if (!cfg.entities.empty()) {
    synth::FixtureEntitySource source(cfg.entities);
    result = synth::run_structured_pipeline(source, synth::default_infoboxes(),
                                            synth::default_properties(), *backend, options,
                                            cfg.max_entities);
  } else {
    if (cfg.stub) throw SchemaError("stub mode needs --entities with a fixture file");
    auto source = synth::WikiApiSource::from_env(synth::default_infoboxes());
    result = synth::run_structured_pipeline(source, synth::default_infoboxes(),
                                            synth::default_properties(), *backend, options,
                                            cfg.max_entities);
  }
  const fs::path out_path = out_dir / "structured.jsonl";
  corpus::write_jsonl(result.examples, out_path);
  ordered_json stats{{"harvested", result.harvested},
                     {"kept_after_filter", result.kept_after_filter},
                     {"skipped_malformed", result.skipped_malformed},
                     {"failed_entities", result.failed_entities},
                     {"examples", result.examples.size()}};
  auto stats_out = open_output(out_dir / "structured.stats.json");
  stats_out << stats.dump(2) << "\n";
  std::cout << stats.dump() << " -> " << out_path.string() << "\n";
}

void run_train(const RunConfig& cfg) {
  require_path(cfg.labeled, "a labeled training file (--labeled)");
  auto examples = corpus::load_labeled(cfg.labeled);
  curriculum::SourceDatasets datasets;
  for (corpus::LabeledExample& example : examples)
    datasets[example.source].push_back(std::move(example));

  curriculum::RecipeCard card;
  if (fs::exists(fs::path(cfg.recipe))) {
    card = curriculum::RecipeCard::load(cfg.recipe);
  } else {
    try {
      card = curriculum::RecipeCard::preset(cfg.recipe);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
  }

  std::optional<classifier::ClassifierModel> reference;
  if (!cfg.reference_model.empty()) reference = classifier::restore_model(cfg.reference_model);
  if (card.curriculum && !reference)
    throw SchemaError("recipe " + card.tag + " needs --reference with a trained model");

  classifier::LogRegConfig train_config;
  train_config.seed = cfg.seed;
  train_config.epochs = cfg.epochs;
  auto outcome = curriculum::run_recipe(card, datasets, train_config,
                                        reference ? &*reference : nullptr);

  const fs::path out_dir = prepare_output_dir(cfg);
  const fs::path model_path = out_dir / "model.json";
  classifier::persist_model(outcome.model, model_path);
  curriculum::write_provenance(outcome, out_dir / "provenance.json");
  std::size_t total = 0;
  for (const auto& [name, count] : outcome.source_counts) total += count;
  std::cout << "trained " << outcome.model.recipe_tag << " on " << total << " examples -> "
            << model_path.string() << "\n";
}

void run_classify(const RunConfig& cfg) {
  require_path(cfg.model_path, "a classifier model (--model)");
  require_path(cfg.input, "a JSONL input file (--input)");
  auto model = classifier::restore_model(cfg.model_path);
  auto lines = read_jsonl(cfg.input);
  const fs::path out_dir = prepare_output_dir(cfg);
  const fs::path out_path = out_dir / "scores.jsonl";
  auto out = open_output(out_path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const json& line = lines[i];
    if (!line.is_object())
      throw SchemaError(cfg.input.string() + ": line " + std::to_string(i + 1) +
                        " is not an object");
    std::string id;
    if (line.contains("task_id") && line.at("task_id").is_string())
      id = line.at("task_id").get<std::string>();
    else if (line.contains("id") && line.at("id").is_string())
      id = line.at("id").get<std::string>();
    const std::string query = line.value("query", std::string{});
    std::string text;
    if (line.contains("rewritten") && line.at("rewritten").is_string())
      text = line.at("rewritten").get<std::string>();
    else
      text = line.value("response", std::string{});
    if (text.empty())
      throw SchemaError(cfg.input.string() + ": line " + std::to_string(i + 1) +
                        " has neither rewritten nor response text");
    const double score = classifier::predict_proba(model, query, text);
    ordered_json record{
        {"id", id}, {"score", score}, {"prediction", score >= cfg.threshold ? 1 : 0}};
    if (line.contains("label") && line.at("label").is_number_integer())
      record["label"] = line.at("label").get<int>();
    out << record.dump() << "\n";
  }
  std::cout << "scored " << lines.size() << " records -> " << out_path.string() << "\n";
}

void run_evaluate(const RunConfig& cfg) {
  if (cfg.matrix.empty())
    throw SchemaError("evaluate needs a non-empty matrix list in the config");
  std::vector<eval::MatrixRow> rows;
  std::vector<std::string> columns;
  eval::RunScores scores;
  for (const MatrixCellSpec& cell : cfg.matrix) {
    eval::MatrixRow row{cell.method, cell.temperature};
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
    if (std::find(columns.begin(), columns.end(), cell.classifier) == columns.end())
      columns.push_back(cell.classifier);
    scores[row][cell.classifier] = read_scores(cell.scores);
  }
  auto matrix = eval::build_detection_matrix(rows, columns, scores, cfg.threshold);

  std::vector<eval::WilcoxonReportEntry> wilcoxon_entries;
  for (const WilcoxonSpec& spec : cfg.wilcoxon) {
    wilcoxon_entries.push_back(
        {spec.label, eval::wilcoxon_signed_rank(read_scores(spec.a), read_scores(spec.b))});
  }

  const fs::path out_dir = prepare_output_dir(cfg);
  const fs::path text_path = out_dir / "report.txt";
  const fs::path json_path = out_dir / "report.json";
  eval::render_report(matrix, {}, wilcoxon_entries, text_path, json_path);
  std::ifstream report(text_path);
  std::cout << report.rdbuf();
  std::cout << "wrote " << text_path.string() << " and " << json_path.string() << "\n";
}

void run_wilcoxon(const RunConfig&, const CliValues& v) {
  eval::Alternative alternative;
  if (v.alternative == "two_sided" || v.alternative == "two-sided")
    alternative = eval::Alternative::two_sided;
  else if (v.alternative == "less")
    alternative = eval::Alternative::less;
  else if (v.alternative == "greater")
    alternative = eval::Alternative::greater;
  else
    throw SchemaError("alternative must be two_sided, less, or greater");
  auto result = eval::wilcoxon_signed_rank(read_scores(v.a), read_scores(v.b), alternative);
  std::cout << "W+=" << result.w_plus << " W-=" << result.w_minus << " n=" << result.n_effective
            << " p=" << result.p_value << " (" << eval::to_string(result.mode) << ")\n";
}

void add_common_flags(CLI::App* cmd, CliValues& v) {
  cmd->add_option("--config", v.config, "JSON run configuration file");
  cmd->add_option("--seed", v.seed, "deterministic run seed");
  cmd->add_flag("--stub", v.stub, "offline deterministic generation backend");
  cmd->add_option("--output-dir", v.output_dir, "directory for output files");
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"ad integration and detection pipeline for conversational search"};
  app.require_subcommand(1);

  auto qa_v = std::make_shared<CliValues>();
  CLI::App* qa = app.add_subcommand("qa", "answer each query over its ranked passages");
  add_common_flags(qa, *qa_v);
  qa->add_option("--topics", qa_v->topics, "query tasks JSONL");
  qa->add_option("--top-k", qa_v->top_k, "passages per prompt");
  qa->add_option("--temperature", qa_v->temperature, "sampling temperature");
  qa->add_option("--max-tokens", qa_v->max_tokens, "completion token budget");
  qa->callback([qa, qa_v] { run_qa(resolve(qa, *qa_v)); });

  auto rw_v = std::make_shared<CliValues>();
  CLI::App* rewrite = app.add_subcommand("rewrite", "insert ads with best-of-n candidate selection");
  add_common_flags(rewrite, *rw_v);
  rewrite->add_option("--topics", rw_v->topics, "query tasks JSONL");
  rewrite->add_option("--responses", rw_v->responses, "base responses JSONL (default from output dir)");
  rewrite->add_option("--model", rw_v->model, "classifier model used as the candidate scorer");
  rewrite->add_option("--n", rw_v->n, "candidates per task; 1 means zero-shot");
  rewrite->add_option("--temperature", rw_v->temperature, "sampling temperature");
  rewrite->add_option("--max-tokens", rw_v->max_tokens, "completion token budget");
  rewrite->callback([rewrite, rw_v] { run_rewrite(resolve(rewrite, *rw_v)); });

  auto sft_v = std::make_shared<CliValues>();
  CLI::App* sft = app.add_subcommand("build-sft", "emit a fine-tuning dataset from best-of-n picks");
  add_common_flags(sft, *sft_v);
  sft->add_option("--topics", sft_v->topics, "query tasks JSONL");
  sft->add_option("--responses", sft_v->responses, "base responses JSONL (default from output dir)");
  sft->add_option("--model", sft_v->model, "classifier model used as the candidate scorer");
  sft->add_option("--n", sft_v->n, "candidate draws per task");
  sft->add_option("--temperature", sft_v->temperature, "sampling temperature");
  sft->add_option("--max-tokens", sft_v->max_tokens, "completion token budget");
  sft->callback([sft, sft_v] { run_build_sft(resolve(sft, *sft_v)); });

  auto naive_v = std::make_shared<CliValues>();
  CLI::App* naive = app.add_subcommand("synth-naive", "rewrite ad-free responses through the insertion prompt pool");
  add_common_flags(naive, *naive_v);
  naive->add_option("--labeled", naive_v->labeled, "labeled JSONL; label-0 rows are rewritten");
  naive->add_option("--pool", naive_v->pool, "prompt pool JSON (default built-in pool)");
  naive->add_option("--prompt-index", naive_v->prompt_index, "fixed pool index; default seeded draw");
  naive->add_option("--temperature", naive_v->temperature, "sampling temperature");
  naive->add_option("--max-tokens", naive_v->max_tokens, "completion token budget");
  naive->callback([naive, naive_v] { run_synth_naive(resolve(naive, *naive_v)); });

  auto struct_v = std::make_shared<CliValues>();
  CLI::App* structured = app.add_subcommand("synth-structured", "harvest product entities and build hard pairs");
  add_common_flags(structured, *struct_v);
  structured->add_option("--entities", struct_v->entities, "entity fixture JSONL; default live wiki APIs");
  structured->add_option("--max-entities", struct_v->max_entities, "cap after filtering; 0 = no cap");
  structured->add_option("--temperature", struct_v->temperature, "sampling temperature");
  structured->add_option("--max-tokens", struct_v->max_tokens, "completion token budget");
  structured->callback([structured, struct_v] { run_synth_structured(resolve(structured, *struct_v)); });

  auto train_v = std::make_shared<CliValues>();
  CLI::App* train = app.add_subcommand("train", "train a detection classifier from a recipe");
  add_common_flags(train, *train_v);
  train->add_option("--labeled", train_v->labeled, "labeled JSONL holding all sources");
  train->add_option("--recipe", train_v->recipe, "recipe tag v0.0..v0.5 or a recipe card file");
  train->add_option("--reference", train_v->reference, "reference model for curriculum difficulty");
  train->add_option("--epochs", train_v->epochs, "training epochs");
  train->callback([train, train_v] { run_train(resolve(train, *train_v)); });

  auto classify_v = std::make_shared<CliValues>();
  CLI::App* classify = app.add_subcommand("classify", "score responses with a trained classifier");
  add_common_flags(classify, *classify_v);
  classify->add_option("--model", classify_v->model, "classifier model file");
  classify->add_option("--input", classify_v->input, "JSONL with response or rewritten fields");
  classify->add_option("--threshold", classify_v->threshold, "decision threshold");
  classify->callback([classify, classify_v] { run_classify(resolve(classify, *classify_v)); });

  auto eval_v = std::make_shared<CliValues>();
  CLI::App* evaluate = app.add_subcommand("evaluate", "build the detection matrix and reports");
  add_common_flags(evaluate, *eval_v);
  evaluate->add_option("--threshold", eval_v->threshold, "detection threshold");
  evaluate->callback([evaluate, eval_v] { run_evaluate(resolve(evaluate, *eval_v)); });

  auto wil_v = std::make_shared<CliValues>();
  CLI::App* wilcoxon = app.add_subcommand("wilcoxon", "paired signed-rank test over two score files");
  add_common_flags(wilcoxon, *wil_v);
  wilcoxon->add_option("--a", wil_v->a, "first score file")->required();
  wilcoxon->add_option("--b", wil_v->b, "second score file")->required();
  wilcoxon->add_option("--alternative", wil_v->alternative, "two_sided, less, or greater");
  wilcoxon->callback([wilcoxon, wil_v] { run_wilcoxon(resolve(wilcoxon, *wil_v), *wil_v); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  } catch (const MissingFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace adforge::cli
