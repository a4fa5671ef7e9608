#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bufferattack/buffer.hpp"
#include "bufferattack/core.hpp"
#include "bufferattack/lexicon.hpp"
#include "bufferattack/victim.hpp"

namespace bufferattack {

/// Decides which tokens are attack targets: anything that is neither a
/// stopword nor made up solely of digits and punctuation.
class TargetFilter {
 public:
  TargetFilter() = default;
  explicit TargetFilter(std::set<std::string> stopwords) : stopwords_(std::move(stopwords)) {}

  bool is_target(const std::string& token) const;
  std::vector<std::size_t> positions(const Tokens& tokens) const;

 private:
  std::set<std::string> stopwords_;
};

/// Deletion-based importance of one target position, with the confidences it
/// was computed from.
struct ImportanceScore {
  std::size_t position = 0;
  std::string word;
  double score = 0.0;
  double label_conf_full = 0.0;     // M_Y(X)
  double label_conf_deleted = 0.0;  // M_Y(X without the word)
  ClassIndex deleted_label = 0;     // M(X without the word)
  // Only meaningful when deleted_label != Y: M_Yhat(X) and M_Yhat(X without the word).
  double flip_conf_full = 0.0;
  double flip_conf_deleted = 0.0;
};

struct ImportanceResult {
  std::vector<ImportanceScore> scores;
  std::optional<Prediction> base;  // unset if the budget ran out before the first query
  bool budget_exhausted = false;
};

Tokens delete_position(const Tokens& tokens, std::size_t position);

/// Queries the victim once on the full text and once per target position with
/// that word deleted. On BudgetExhausted returns the scores computed so far.
ImportanceResult word_importance(const Document& doc, const std::vector<std::size_t>& targets,
                                 VictimHandle& victim);

/// Top floor(epsilon * |scores|) entries (at least one), by descending score
/// and then ascending position.
std::vector<ImportanceScore> select_targets(std::vector<ImportanceScore> scores, double epsilon);

/// One query issued during the substitution stage.
struct TraceEvent {
  enum class Kind { kRefresh, kSubstitute };
  Kind kind = Kind::kRefresh;
  std::size_t position = 0;
  std::string word;
  std::string candidate;     // empty for refresh
  double soft_label = 0.0;   // M_Y of the queried text
  ClassIndex hard_label = 0;
  double delta = 0.0;        // refreshed soft label minus soft_label
  std::uint64_t queries_so_far = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct CommitEvent {
  std::size_t position = 0;
  std::string word;
  std::string candidate;
  friend bool operator==(const CommitEvent&, const CommitEvent&) = default;
};

struct AttackTrace {
  std::string doc_id;
  std::vector<ImportanceScore> importance;
  std::vector<std::vector<std::string>> candidate_lists;  // per attacked word, in order
  std::vector<TraceEvent> events;
  std::vector<CommitEvent> commits;
  AttackStatus status = AttackStatus::kExhausted;

  /// JSON Lines: one object per importance score, per query event and per
  /// commit, then a closing {"type":"end"} line.
  std::string to_jsonl() const;
};

struct AttackResult {
  AttackOutcome outcome;
  AttackTrace trace;
};

/// Two-stage attack on one correctly classified document.
///
/// Stage one ranks target words by deletion importance. Stage two walks the
/// ranked words: fetch the candidate list (history-pruned, or the full synonym
/// set when pruning is disabled), refresh the soft label of the current
/// adversarial text, query each substitution and record its confidence drop
/// into `table`. A label flip ends the attack (the flipper most similar to the
/// original wins); otherwise the substitution with the largest drop is kept
/// and the next word is attacked. `victim` enforces the query budget.
AttackResult attack_document(const Document& doc, VictimHandle& victim, HistoryTable& table,
                             const Lexicon& lexicon, const TargetFilter& filter,
                             const AttackConfig& cfg);

}  // namespace bufferattack
