#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace bufferattack {

using ClassIndex = int;
using Tokens = std::vector<std::string>;

// Error taxonomy. The CLI maps these onto exit codes (usage=1, I/O=2,
// protocol=3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};
// Malformed or corrupt file content.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};
// Remote victim failures: transport, timeout, or an invalid response.
class ProtocolError : public Error {
 public:
  using Error::Error;
};
class BudgetExhausted : public Error {
 public:
  BudgetExhausted() : Error("query budget exhausted") {}
};

/// A tokenized text together with its ground-truth label.
struct Document {
  std::string id;
  Tokens tokens;
  ClassIndex label = 0;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Hard label plus per-class confidences returned by a victim model.
///
/// Always normalized: entries in [0,1] and summing to 1 within
/// kProbabilityTolerance. The hard label is the argmax of the distribution,
/// lowest index on ties.
class Prediction {
 public:
  static constexpr double kProbabilityTolerance = 1e-6;

  // Throws std::invalid_argument if `probs` is not a distribution.
  static Prediction from_probs(Eigen::VectorXd probs);
  // As above, and additionally requires `label` to be the argmax.
  static Prediction from_labeled(ClassIndex label, Eigen::VectorXd probs);

  ClassIndex hard_label() const { return hard_label_; }
  const Eigen::VectorXd& probs() const { return probs_; }
  int num_classes() const { return static_cast<int>(probs_.size()); }
  double confidence(ClassIndex c) const { return probs_(c); }

 private:
  Prediction(ClassIndex label, Eigen::VectorXd probs)
      : hard_label_(label), probs_(std::move(probs)) {}

  ClassIndex hard_label_;
  Eigen::VectorXd probs_;
};

// Lowest index wins ties.
template <typename Derived>
ClassIndex argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return static_cast<ClassIndex>(best);
}

struct AttackConfig {
  double epsilon = 1.0;  // fraction of target words attacked
  double gamma = 0.3;    // candidate list ratio
  double alpha = 0.3;    // significance level of the pruning test
  std::size_t synonym_top_n = 50;
  double synonym_min_sim = 0.5;
  std::optional<std::uint64_t> query_budget;  // per document
  bool pruning_enabled = true;
  // Query every candidate of a word before looking for label flips instead of
  // stopping at the first flip.
  bool scan_all_candidates = false;
  std::uint64_t seed = 0;
};

// Returns `cfg` unchanged or throws ConfigError naming the offending field.
AttackConfig validate_config(const AttackConfig& cfg);

// Stable text rendering of the config, used to tag history tables.
std::string config_fingerprint(const AttackConfig& cfg);

// kSkipped: the victim already misclassifies the input, nothing is attacked.
enum class AttackStatus { kSuccess, kExhausted, kBudget, kSkipped };

std::string_view to_string(AttackStatus s);
AttackStatus attack_status_from_string(std::string_view s);

struct AttackOutcome {
  Document adversarial;
  bool success = false;
  std::uint64_t queries_used = 0;
  std::uint64_t stage_one_queries = 0;
  std::uint64_t stage_two_queries = 0;
  double perturbed_fraction = 0.0;
  double similarity = 1.0;
  AttackStatus status = AttackStatus::kExhausted;
};

/// Fraction of positions whose tokens differ. Throws std::invalid_argument on
/// a length mismatch or empty documents.
double perturbation_rate(const Document& original, const Document& adversarial);

/// Lowercases, splits on whitespace (and control characters) and strips leading/trailing ASCII
/// punctuation from each piece. Pieces that become empty are dropped.
Tokens tokenize(std::string_view text);

std::string join_tokens(const Tokens& tokens);

}  // namespace bufferattack
