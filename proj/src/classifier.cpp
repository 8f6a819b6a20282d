#include "adforge/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"

namespace adforge::classifier {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) != 0 || uc >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string classification_text(const std::string& query, const std::string& response) {
  if (query.empty()) return response;
  if (response.empty()) return query;
  return query + " [SEP] " + response;
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view term) const {
  const auto it = std::lower_bound(terms.begin(), terms.end(), term);
  if (it == terms.end() || *it != term) return std::nullopt;
  return static_cast<std::size_t>(it - terms.begin());
}

Vocabulary build_vocabulary(const std::vector<corpus::LabeledExample>& examples,
                            std::int64_t min_df, std::size_t max_terms) {
  if (examples.empty()) throw EmptyCorpus("cannot build a vocabulary from zero examples");
  if (min_df < 1) throw std::invalid_argument("min_df must be >= 1");
  if (max_terms < 1) throw std::invalid_argument("max_terms must be >= 1");

  std::map<std::string, std::int64_t> doc_freq;
  for (const auto& example : examples) {
    std::set<std::string> seen;
    for (auto& token : tokenize(classification_text(example.query, example.response))) {
      seen.insert(std::move(token));
    }
    for (const auto& token : seen) ++doc_freq[token];
  }

  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [term, df] : doc_freq) {
    if (df >= min_df) kept.emplace_back(term, df);
  }
  if (kept.size() > max_terms) {
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    kept.resize(max_terms);
    std::sort(kept.begin(), kept.end());
  }

  Vocabulary vocab;
  vocab.n_docs = static_cast<std::int64_t>(examples.size());
  for (auto& [term, df] : kept) {
    vocab.terms.push_back(std::move(term));
    vocab.doc_freq.push_back(df);
  }
  return vocab;
}

double FeatureVector::dot(const Eigen::VectorXd& dense) const {
  double sum = 0.0;
  for (const auto& [index, weight] : entries) sum += weight * dense[index];
  return sum;
}

double FeatureVector::squared_norm() const {
  double sum = 0.0;
  for (const auto& [index, weight] : entries) sum += weight * weight;
  return sum;
}

FeatureVector featurize(std::string_view text, const Vocabulary& vocab) {
  std::map<std::size_t, double> counts;
  for (const auto& token : tokenize(text)) {
    if (const auto index = vocab.index_of(token)) counts[*index] += 1.0;
  }

  FeatureVector features;
  double squared = 0.0;
  for (const auto& [index, tf] : counts) {
    const double idf =
        std::log(static_cast<double>(vocab.n_docs) / static_cast<double>(vocab.doc_freq[index]));
    const double weight = tf * idf;
    if (weight == 0.0) continue;
    features.entries.emplace_back(static_cast<std::uint32_t>(index), weight);
    squared += weight * weight;
  }
  if (squared > 0.0) {
    const double norm = std::sqrt(squared);
    for (auto& [index, weight] : features.entries) weight /= norm;
  }
  return features;
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::logreg ? "logreg" : "naive_bayes";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "logreg") return ModelKind::logreg;
  if (name == "naive_bayes") return ModelKind::naive_bayes;
  throw FormatVersionMismatch("unknown model kind: " + name);
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

void check_two_classes(const std::vector<corpus::LabeledExample>& train) {
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& example : train) {
    (example.label == 1 ? has_pos : has_neg) = true;
  }
  if (train.empty() || !has_pos || !has_neg) {
    throw SingleClassTraining("training set must contain both labels");
  }
}

}  // namespace

double logreg_objective(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                        const Eigen::VectorXd& weights, double bias, double l2,
                        Eigen::VectorXd* grad_weights, double* grad_bias) {
  const auto n = features.size();
  if (n == 0 || labels.size() != n) throw LengthMismatch("features/labels size mismatch");

  if (grad_weights != nullptr) grad_weights->setZero(weights.size());
  if (grad_bias != nullptr) *grad_bias = 0.0;

  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = features[i].dot(weights) + bias;
    loss += softplus(-z) + (labels[i] == 1 ? 0.0 : z);
    if (grad_weights != nullptr || grad_bias != nullptr) {
      const double residual = sigmoid(z) - static_cast<double>(labels[i]);
      if (grad_weights != nullptr) {
        for (const auto& [index, weight] : features[i].entries) {
          (*grad_weights)[index] += residual * weight;
        }
      }
      if (grad_bias != nullptr) *grad_bias += residual;
    }
  }
  loss /= static_cast<double>(n);
  loss += 0.5 * l2 * weights.squaredNorm();
  if (grad_weights != nullptr) {
    *grad_weights /= static_cast<double>(n);
    *grad_weights += l2 * weights;
  }
  if (grad_bias != nullptr) *grad_bias /= static_cast<double>(n);
  return loss;
}

ClassifierModel train_logreg(const corpus::DatasetSplit& split, const LogRegConfig& config,
                             TrainAudit* audit) {
  check_two_classes(split.train);

  auto vocab = build_vocabulary(split.train, config.min_df, config.max_terms);
  const auto n = split.train.size();
  std::vector<FeatureVector> features(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& example = split.train[i];
    features[i] = featurize(classification_text(example.query, example.response), vocab);
    labels[i] = example.label;
  }

  Eigen::VectorXd weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocab.size()));
  double bias = 0.0;
  double learning_rate = config.learning_rate;
  const auto batch = static_cast<std::size_t>(std::max(config.batch_size, 1));

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  double objective = logreg_objective(features, labels, weights, bias, config.l2);
  if (audit != nullptr) audit->epoch_objectives.push_back(objective);

  Eigen::VectorXd batch_grad(weights.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (!(epoch == 0 && config.ordered_first_epoch)) {
      std::shuffle(order.begin(), order.end(), rng);
    }
    if (epoch == 0 && audit != nullptr) audit->first_epoch_order = order;

    // Backtracking guard: retry the epoch with a halved step until the
    // full-batch objective stops increasing.
    bool accepted = false;
    for (int attempt = 0; attempt < 50 && !accepted; ++attempt) {
      const Eigen::VectorXd weights_before = weights;
      const double bias_before = bias;

      for (std::size_t start = 0; start < n; start += batch) {
        const auto stop = std::min(start + batch, n);
        batch_grad.setZero();
        double grad_bias = 0.0;
        for (std::size_t k = start; k < stop; ++k) {
          const auto i = order[k];
          const double z = features[i].dot(weights) + bias;
          const double residual = sigmoid(z) - static_cast<double>(labels[i]);
          for (const auto& [index, weight] : features[i].entries) {
            batch_grad[index] += residual * weight;
          }
          grad_bias += residual;
        }
        const double scale = 1.0 / static_cast<double>(stop - start);
        batch_grad *= scale;
        batch_grad += config.l2 * weights;
        weights -= learning_rate * batch_grad;
        bias -= learning_rate * grad_bias * scale;
      }

      const double updated = logreg_objective(features, labels, weights, bias, config.l2);
      if (updated <= objective + 1e-9) {
        objective = updated;
        accepted = true;
      } else {
        weights = weights_before;
        bias = bias_before;
        learning_rate *= 0.5;
      }
    }
    if (audit != nullptr) audit->epoch_objectives.push_back(objective);
    if (!accepted) break;  // step size exhausted, nothing left to gain
  }

  ClassifierModel model;
  model.kind = ModelKind::logreg;
  model.vocabulary = std::move(vocab);
  model.parameters = LogRegParams{std::move(weights), bias};
  model.final_train_loss = objective;
  return model;
}

ClassifierModel train_naive_bayes(const corpus::DatasetSplit& split,
                                  const NaiveBayesConfig& config) {
  check_two_classes(split.train);
  if (!(config.alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");

  auto vocab = build_vocabulary(split.train, config.min_df, config.max_terms);
  const auto vocab_size = static_cast<Eigen::Index>(vocab.size());

  Eigen::MatrixX2d counts = Eigen::MatrixX2d::Zero(vocab_size, 2);
  std::array<double, 2> class_docs{0.0, 0.0};
  for (const auto& example : split.train) {
    class_docs[example.label] += 1.0;
    for (const auto& token : tokenize(classification_text(example.query, example.response))) {
      if (const auto index = vocab.index_of(token)) {
        counts(static_cast<Eigen::Index>(*index), example.label) += 1.0;
      }
    }
  }

  NaiveBayesParams params;
  params.alpha = config.alpha;
  const double total_docs = class_docs[0] + class_docs[1];
  params.log_prior = {std::log(class_docs[0] / total_docs), std::log(class_docs[1] / total_docs)};
  params.log_likelihood.resize(vocab_size, 2);
  for (int label = 0; label < 2; ++label) {
    const double total_terms = counts.col(label).sum();
    const double denominator = total_terms + config.alpha * static_cast<double>(vocab_size);
    params.log_likelihood.col(label) =
        ((counts.col(label).array() + config.alpha) / denominator).log();
  }

  ClassifierModel model;
  model.kind = ModelKind::naive_bayes;
  model.vocabulary = std::move(vocab);
  model.parameters = std::move(params);
  return model;
}

double predict_proba(const ClassifierModel& model, const std::string& query,
                     const std::string& response) {
  const auto text = classification_text(query, response);
  if (model.kind == ModelKind::logreg) {
    const auto& params = std::get<LogRegParams>(model.parameters);
    const auto features = featurize(text, model.vocabulary);
    return sigmoid(features.dot(params.weights) + params.bias);
  }

  const auto& params = std::get<NaiveBayesParams>(model.parameters);
  std::array<double, 2> score = {params.log_prior[0], params.log_prior[1]};
  for (const auto& token : tokenize(text)) {
    if (const auto index = model.vocabulary.index_of(token)) {
      const auto row = static_cast<Eigen::Index>(*index);
      score[0] += params.log_likelihood(row, 0);
      score[1] += params.log_likelihood(row, 1);
    }
  }
  // posterior via log-sum-exp
  const double peak = std::max(score[0], score[1]);
  const double z0 = std::exp(score[0] - peak);
  const double z1 = std::exp(score[1] - peak);
  return z1 / (z0 + z1);
}

namespace {

constexpr int kFormatVersion = 1;

json vocabulary_to_json(const Vocabulary& vocab) {
  return {{"terms", vocab.terms}, {"doc_freq", vocab.doc_freq}, {"n_docs", vocab.n_docs}};
}

Vocabulary vocabulary_from_json(const json& object) {
  Vocabulary vocab;
  vocab.terms = object.at("terms").get<std::vector<std::string>>();
  vocab.doc_freq = object.at("doc_freq").get<std::vector<std::int64_t>>();
  vocab.n_docs = object.at("n_docs").get<std::int64_t>();
  if (vocab.terms.size() != vocab.doc_freq.size()) {
    throw FormatVersionMismatch("vocabulary arrays out of step");
  }
  return vocab;
}

}  // namespace

void persist_model(const ClassifierModel& model, const std::filesystem::path& path) {
  ordered_json object;
  object["format_version"] = kFormatVersion;
  object["kind"] = to_string(model.kind);
  object["recipe_tag"] = model.recipe_tag;
  object["threshold"] = model.threshold;
  object["vocabulary"] = vocabulary_to_json(model.vocabulary);

  ordered_json parameters;
  if (model.kind == ModelKind::logreg) {
    const auto& params = std::get<LogRegParams>(model.parameters);
    parameters["weights"] = std::vector<double>(params.weights.begin(), params.weights.end());
    parameters["bias"] = params.bias;
  } else {
    const auto& params = std::get<NaiveBayesParams>(model.parameters);
    parameters["alpha"] = params.alpha;
    parameters["log_prior"] = std::vector<double>{params.log_prior[0], params.log_prior[1]};
    parameters["log_likelihood_neg"] = std::vector<double>(params.log_likelihood.col(0).begin(),
                                                           params.log_likelihood.col(0).end());
    parameters["log_likelihood_pos"] = std::vector<double>(params.log_likelihood.col(1).begin(),
                                                           params.log_likelihood.col(1).end());
  }
  if (model.final_train_loss.has_value()) {
    parameters["final_train_loss"] = *model.final_train_loss;
  }
  object["parameters"] = std::move(parameters);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << object.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

ClassifierModel restore_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingFile("no such model file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  json object;
  try {
    object = json::parse(in);
  } catch (const json::exception& err) {
    throw IoError("model file " + path.string() + " is not readable JSON: " + err.what());
  }

  try {
    if (!object.contains("format_version") || object.at("format_version").get<int>() != kFormatVersion) {
      throw FormatVersionMismatch("unsupported model format in " + path.string());
    }
    ClassifierModel model;
    model.kind = model_kind_from_string(object.at("kind").get<std::string>());
    model.recipe_tag = object.at("recipe_tag").get<std::string>();
    model.threshold = object.at("threshold").get<double>();
    model.vocabulary = vocabulary_from_json(object.at("vocabulary"));

    const auto& parameters = object.at("parameters");
    const auto vocab_size = static_cast<Eigen::Index>(model.vocabulary.size());
    if (model.kind == ModelKind::logreg) {
      LogRegParams params;
      const auto weights = parameters.at("weights").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(weights.size()) != vocab_size) {
        throw FormatVersionMismatch("weight count does not match vocabulary");
      }
      params.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), vocab_size);
      params.bias = parameters.at("bias").get<double>();
      model.parameters = std::move(params);
    } else {
      NaiveBayesParams params;
      params.alpha = parameters.at("alpha").get<double>();
      const auto prior = parameters.at("log_prior").get<std::vector<double>>();
      const auto neg = parameters.at("log_likelihood_neg").get<std::vector<double>>();
      const auto pos = parameters.at("log_likelihood_pos").get<std::vector<double>>();
      if (prior.size() != 2 || static_cast<Eigen::Index>(neg.size()) != vocab_size ||
          static_cast<Eigen::Index>(pos.size()) != vocab_size) {
        throw FormatVersionMismatch("parameter arrays do not match vocabulary");
      }
      params.log_prior = {prior[0], prior[1]};
      params.log_likelihood.resize(vocab_size, 2);
      params.log_likelihood.col(0) = Eigen::Map<const Eigen::VectorXd>(neg.data(), vocab_size);
      params.log_likelihood.col(1) = Eigen::Map<const Eigen::VectorXd>(pos.data(), vocab_size);
      model.parameters = std::move(params);
    }
    if (parameters.contains("final_train_loss")) {
      model.final_train_loss = parameters.at("final_train_loss").get<double>();
    }
    return model;
  } catch (const json::exception& err) {
    throw FormatVersionMismatch("model file " + path.string() + " is incomplete: " + err.what());
  }
}

}  // namespace adforge::classifier
