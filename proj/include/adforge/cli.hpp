#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adforge/generator.hpp"

namespace adforge::cli {

// One detection-matrix cell: where the scores came from and which classifier
// produced them.
struct MatrixCellSpec {
  std::string method;
  double temperature = 1.0;
  std::string classifier;
  std::filesystem::path scores;
};

// One paired significance test between two score files.
struct WilcoxonSpec {
  std::string label;
  std::filesystem::path a;
  std::filesystem::path b;
};

// Shared run configuration. Every field can come from the --config JSON file;
// command-line flags override it. Seeds default to 0 when absent.
struct RunConfig {
  std::filesystem::path topics;
  std::filesystem::path labeled;
  std::filesystem::path entities;
  std::filesystem::path responses;
  std::filesystem::path input;
  std::filesystem::path model_path;
  std::filesystem::path reference_model;
  std::filesystem::path pool;
  std::filesystem::path output_dir = "out";

  std::string recipe = "v0.3";
  int top_k = 5;
  int n = 10;
  int max_tokens = 512;
  int epochs = 40;
  int prompt_index = -1;  // <0 means seeded-random pool draw
  std::size_t max_entities = 0;
  double temperature = 1.0;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  bool stub = false;

  gen::LlmEndpointConfig endpoint;  // env vars override the credentials only

  std::vector<MatrixCellSpec> matrix;
  std::vector<WilcoxonSpec> wilcoxon;
};

RunConfig load_run_config(const std::filesystem::path& path);

// Runs one subcommand and returns the process exit code: 0 success, 1 runtime
// failure, 2 usage errors, 3 config or input-schema errors.
int dispatch(int argc, const char* const* argv);

}  // namespace adforge::cli
