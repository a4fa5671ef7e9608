#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bufferattack/core.hpp"
#include "bufferattack/lexicon.hpp"

namespace httplib {
class Client;
}

namespace bufferattack {

/// Black-box text classifier: tokens in, class distribution out.
/// Implementations must be safe for concurrent predict() calls.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual int num_classes() const = 0;
  virtual Prediction predict(const Tokens& tokens) const = 0;
};

/// Query-accounting wrapper around a Classifier.
///
/// Every predict() call costs exactly one query. With a budget set, the call
/// that would exceed it throws BudgetExhausted without touching the model;
/// the check and the increment are one atomic step.
class VictimHandle {
 public:
  explicit VictimHandle(const Classifier& model, std::optional<std::uint64_t> budget = {})
      : model_(&model), budget_(budget) {}

  VictimHandle(const VictimHandle&) = delete;
  VictimHandle& operator=(const VictimHandle&) = delete;

  Prediction predict(const Tokens& tokens);

  std::uint64_t queries() const { return counter_.load(std::memory_order_acquire); }
  std::optional<std::uint64_t> budget() const { return budget_; }
  bool exhausted() const { return budget_ && queries() >= *budget_; }
  int num_classes() const { return model_->num_classes(); }
  const Classifier& model() const { return *model_; }

 private:
  const Classifier* model_;
  std::optional<std::uint64_t> budget_;
  std::atomic<std::uint64_t> counter_{0};
};

/// Multinomial naive Bayes with Laplace smoothing. Out-of-vocabulary tokens
/// are ignored at prediction time. Parameters are derived from integer
/// counts, so training is independent of corpus order.
class NaiveBayesModel final : public Classifier {
 public:
  static NaiveBayesModel train(const std::vector<Document>& corpus, int num_classes,
                               double smoothing = 1.0);

  int num_classes() const override { return static_cast<int>(class_doc_counts_.size()); }
  Prediction predict(const Tokens& tokens) const override;

  double smoothing() const { return smoothing_; }
  const Eigen::VectorXd& class_log_priors() const { return log_priors_; }
  // nullptr for tokens never seen in training.
  const Eigen::VectorXd* token_log_likelihoods(const std::string& token) const;
  std::size_t vocabulary_size() const { return token_counts_.size(); }

  std::string to_json() const;
  static NaiveBayesModel from_json(const std::string& text);

 private:
  NaiveBayesModel(Eigen::VectorXd class_doc_counts,
                  std::map<std::string, Eigen::VectorXd> token_counts, double smoothing);

  Eigen::VectorXd class_doc_counts_;
  std::map<std::string, Eigen::VectorXd> token_counts_;
  double smoothing_;
  Eigen::VectorXd log_priors_;
  std::map<std::string, Eigen::VectorXd> log_likelihoods_;
};

struct LogRegOptions {
  int epochs = 300;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;  // recorded with the model; training itself is deterministic
};

/// Softmax regression over mean-pooled word vectors (unknown tokens skipped,
/// all-unknown texts map to the zero vector).
class LogRegModel final : public Classifier {
 public:
  LogRegModel(std::shared_ptr<const EmbeddingTable> table, Eigen::MatrixXd weights,
              Eigen::VectorXd bias, std::uint64_t seed = 0);

  static LogRegModel train(const std::vector<Document>& corpus,
                           std::shared_ptr<const EmbeddingTable> table, int num_classes,
                           const LogRegOptions& opts = {});

  int num_classes() const override { return static_cast<int>(bias_.size()); }
  Prediction predict(const Tokens& tokens) const override;

  Eigen::VectorXd features(const Tokens& tokens) const;
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& bias() const { return bias_; }

  std::string to_json(const std::string& embeddings_path) const;
  static LogRegModel from_json(const std::string& text,
                               std::shared_ptr<const EmbeddingTable> table);

 private:
  std::shared_ptr<const EmbeddingTable> table_;
  Eigen::MatrixXd weights_;  // classes x dim
  Eigen::VectorXd bias_;
  std::uint64_t seed_;
};

/// Mean cross-entropy of softmax(W x + b) over the rows of `features` and its
/// gradient.
struct LossGradient {
  double loss;
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_bias;
};
LossGradient softmax_loss_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                                   const Eigen::MatrixXd& features,
                                   const std::vector<ClassIndex>& labels);

template <typename Derived>
Eigen::VectorXd softmax(const Eigen::MatrixBase<Derived>& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).unaryExpr([](double x) { return std::exp(x); });
  return e / e.sum();
}

struct RemoteModelConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080, optionally with a path prefix
  int timeout_ms = 5000;
  int num_classes = 2;
};

/// Client for a model served over HTTP: POST {endpoint}/predict with
/// {"text": str}, expecting 200 and {"label": int, "probs": [float...]}.
/// One request per predict(); any transport failure or invalid response
/// throws ProtocolError.
class RemoteClassifier final : public Classifier {
 public:
  explicit RemoteClassifier(RemoteModelConfig cfg);
  ~RemoteClassifier() override;

  int num_classes() const override { return cfg_.num_classes; }
  Prediction predict(const Tokens& tokens) const override;
  Prediction predict_text(const std::string& text) const;

 private:
  RemoteModelConfig cfg_;
  std::string path_;
  mutable std::mutex mu_;
  std::unique_ptr<httplib::Client> client_;
};

// Validates a response body against the wire contract.
Prediction parse_remote_response(const std::string& body, int num_classes);

Prediction remote_predict(const RemoteModelConfig& cfg, const std::string& text);

/// Saved models are JSON with "version" and "arch" fields.
void save_model(const std::filesystem::path& path, const NaiveBayesModel& model);
void save_model(const std::filesystem::path& path, const LogRegModel& model,
                const std::string& embeddings_path);

/// Loads either architecture. A logistic-regression model uses `table` when
/// given, otherwise the embedding file recorded at training time.
std::unique_ptr<Classifier> load_model(const std::filesystem::path& path,
                                       std::shared_ptr<const EmbeddingTable> table = nullptr);

}  // namespace bufferattack
