#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bufferattack/attack.hpp"
#include "bufferattack/buffer.hpp"
#include "bufferattack/core.hpp"
#include "bufferattack/lexicon.hpp"
#include "bufferattack/victim.hpp"

namespace bufferattack {

struct DocumentRecord {
  std::string id;
  ClassIndex label = 0;
  bool originally_correct = false;
  ClassIndex original_prediction = 0;
  std::optional<AttackOutcome> outcome;  // set for attacked documents only
};

/// Dataset-level metrics.
///
/// Accuracies are over all documents (misclassified originals count as wrong
/// both before and after the attack). `attacked_accuracy` is the accuracy on
/// attacked documents only. Query means are over attacked documents;
/// perturbation and similarity means are over successful attacks.
struct CampaignReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t attacked = 0;
  std::size_t success_count = 0;
  double original_accuracy = 0.0;
  double adv_accuracy = 0.0;
  double attacked_accuracy = 0.0;
  std::uint64_t screening_queries = 0;
  std::uint64_t total_queries = 0;  // attack queries, excluding screening
  std::uint64_t stage_one_queries = 0;
  std::uint64_t stage_two_queries = 0;
  double mean_queries = 0.0;
  double mean_queries_successful = 0.0;
  double mean_perturbation = 0.0;
  double mean_similarity = 0.0;
  std::string config_fingerprint;
  std::vector<DocumentRecord> documents;

  std::string to_json() const;
  static CampaignReport from_json(const std::string& text);
};

struct CampaignResult {
  CampaignReport report;
  HistoryTable table;
  std::vector<Document> adversarial;  // one per attacked document, original labels
  std::vector<AttackTrace> traces;
};

/// Thrown when a victim or I/O failure interrupts a campaign; carries the
/// report for the documents finished so far.
class CampaignAborted : public Error {
 public:
  CampaignAborted(const std::string& what, bool protocol, std::shared_ptr<CampaignResult> partial)
      : Error(what), protocol_(protocol), partial_(std::move(partial)) {}
  bool protocol() const { return protocol_; }
  const CampaignResult& partial() const { return *partial_; }

 private:
  bool protocol_;
  std::shared_ptr<CampaignResult> partial_;
};

struct CampaignOptions {
  AttackConfig attack;
  const HistoryTable* warm_table = nullptr;
  std::optional<std::uint64_t> shuffle_seed;  // file order when unset
};

/// Screens every document with one query (not charged to the attack), then
/// attacks the correctly classified ones in order against one shared history
/// table. Each attacked document gets its own query budget.
CampaignResult run_campaign(const std::vector<Document>& dataset, const Classifier& victim,
                            const Lexicon& lexicon, const TargetFilter& filter,
                            const CampaignOptions& options);

struct BudgetSweepPoint {
  std::uint64_t budget = 0;
  std::size_t success_count = 0;
  std::size_t attacked = 0;
  std::uint64_t max_document_queries = 0;
};

struct BudgetSweepResult {
  std::vector<BudgetSweepPoint> points;
  std::string to_json() const;
};

/// One independent campaign per budget (fresh table unless `options` carries
/// a warm table). Budgets must be positive and strictly ascending.
BudgetSweepResult budget_sweep(const std::vector<Document>& dataset, const Classifier& victim,
                               const Lexicon& lexicon, const TargetFilter& filter,
                               const CampaignOptions& options,
                               const std::vector<std::uint64_t>& budgets);

struct TransferResult {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::uint64_t queries = 0;
};

/// Accuracy of `victim` on `docs`, queried through its own counter.
TransferResult evaluate_transfer(const std::vector<Document>& docs, const Classifier& victim);

enum class QueryAveraging { kAttacked, kSuccessful };

/// Plain-text table with the usual attack-report columns.
std::string render_report(const CampaignReport& report, QueryAveraging averaging);

}  // namespace bufferattack
