#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "adforge/corpus.hpp"
#include "adforge/errors.hpp"

namespace adforge::classifier {

/// Lowercases and splits on non-alphanumeric bytes. Bytes above 0x7f are kept
/// inside tokens so UTF-8 sequences survive intact.
std::vector<std::string> tokenize(std::string_view text);

/// The text a classifier sees for a (query, response) pair: the two parts
/// joined by " [SEP] ", with empty parts dropped.
std::string classification_text(const std::string& query, const std::string& response);

struct Vocabulary {
  std::vector<std::string> terms;        // sorted lexicographically, unique
  std::vector<std::int64_t> doc_freq;    // aligned with terms
  std::int64_t n_docs = 0;

  std::size_t size() const { return terms.size(); }
  std::optional<std::size_t> index_of(std::string_view term) const;
};

/// Builds the vocabulary over one document per example. Terms with document
/// frequency below min_df are dropped; when more than max_terms survive, the
/// highest-doc_freq terms win with lexicographic tie-break.
Vocabulary build_vocabulary(const std::vector<corpus::LabeledExample>& examples,
                            std::int64_t min_df = 1, std::size_t max_terms = 50000);

/// Sparse L2-normalized TF-IDF vector: weight(t) = tf(t) * ln(n_docs / df(t)).
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;  // strictly increasing indices

  double dot(const Eigen::VectorXd& dense) const;
  double squared_norm() const;
};

FeatureVector featurize(std::string_view text, const Vocabulary& vocab);

enum class ModelKind { logreg, naive_bayes };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct LogRegParams {
  Eigen::VectorXd weights;  // one per vocabulary term
  double bias = 0.0;
};

struct NaiveBayesParams {
  std::array<double, 2> log_prior{};          // class 0, class 1
  Eigen::MatrixX2d log_likelihood;            // per term, columns = classes
  double alpha = 1.0;
};

/// The scorer H: a trained model whose predict_proba returns the probability
/// that a response contains an advertisement.
struct ClassifierModel {
  ModelKind kind = ModelKind::logreg;
  Vocabulary vocabulary;
  std::variant<LogRegParams, NaiveBayesParams> parameters;
  std::string recipe_tag;
  double threshold = 0.5;
  std::optional<double> final_train_loss;
};

struct LogRegConfig {
  double learning_rate = 0.5;
  int epochs = 40;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  int batch_size = 32;
  std::int64_t min_df = 1;
  std::size_t max_terms = 50000;
  // Curriculum hook: consume the train set in its given order for the first
  // epoch, seeded shuffles afterwards.
  bool ordered_first_epoch = false;
};

struct NaiveBayesConfig {
  double alpha = 1.0;  // add-alpha smoothing
  std::int64_t min_df = 1;
  std::size_t max_terms = 50000;
};

/// Per-training bookkeeping used by tests and recipe provenance.
struct TrainAudit {
  std::vector<double> epoch_objectives;        // full-batch objective after each epoch
  std::vector<std::size_t> first_epoch_order;  // train indices in consumption order
};

/// Regularized mean logistic loss and (optionally) its gradient at (w, b):
///   L = mean(-y log p - (1-y) log(1-p)) + l2/2 * |w|^2.
double logreg_objective(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                        const Eigen::VectorXd& weights, double bias, double l2,
                        Eigen::VectorXd* grad_weights = nullptr, double* grad_bias = nullptr);

/// Deterministic mini-batch gradient descent with a per-epoch backtracking
/// guard, so the full-batch objective is non-increasing across epochs.
ClassifierModel train_logreg(const corpus::DatasetSplit& split, const LogRegConfig& config = {},
                             TrainAudit* audit = nullptr);

/// Multinomial naive Bayes on raw term counts with add-alpha smoothing,
/// computed in log space.
ClassifierModel train_naive_bayes(const corpus::DatasetSplit& split,
                                  const NaiveBayesConfig& config = {});

/// P(label = 1 | query, response) in [0,1]. Deterministic.
double predict_proba(const ClassifierModel& model, const std::string& query,
                     const std::string& response);

/// Model files round-trip bit-identically: restored models reproduce every
/// prediction of the persisted model exactly.
void persist_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel restore_model(const std::filesystem::path& path);

}  // namespace adforge::classifier
