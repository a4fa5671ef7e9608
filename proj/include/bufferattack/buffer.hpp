#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bufferattack/core.hpp"
#include "bufferattack/lexicon.hpp"

namespace bufferattack {

/// History of confidence drops keyed by (word, attacked label, candidate).
///
/// Sample lists are append-only multisets kept in insertion order. Keys are
/// held in sorted containers so iteration and serialization are canonical.
class HistoryTable {
 public:
  using Samples = std::vector<double>;
  using CandidateHistory = std::map<std::string, Samples>;

  struct Metadata {
    std::string created_by;
    std::string config_fingerprint;
    friend bool operator==(const Metadata&, const Metadata&) = default;
  };

  // Throws std::invalid_argument for a delta outside [-1,1] or a key
  // containing the unit separator.
  void record(const std::string& word, ClassIndex label, const std::string& candidate,
              double delta);

  // nullptr when (word, label) has never been recorded.
  const CandidateHistory* lookup(const std::string& word, ClassIndex label) const;
  const Samples* samples(const std::string& word, ClassIndex label,
                         const std::string& candidate) const;

  bool empty() const { return entries_.empty(); }
  std::size_t key_count() const;     // (word, label, candidate) triples
  std::size_t sample_count() const;

  Metadata& metadata() { return metadata_; }
  const Metadata& metadata() const { return metadata_; }

  /// {"version":1, "metadata":{...}, "entries":{"w\u001fY\u001fc":[...]}}
  std::string to_json() const;
  // Throws FormatError on corrupt input or a version mismatch.
  static HistoryTable from_json(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static HistoryTable load(const std::filesystem::path& path);

  friend bool operator==(const HistoryTable&, const HistoryTable&) = default;

 private:
  std::map<std::pair<std::string, ClassIndex>, CandidateHistory> entries_;
  Metadata metadata_;
};

struct CandidateList {
  enum class Source { kDefault, kHistory };

  std::string word;
  std::vector<std::string> candidates;
  Source source = Source::kDefault;
  std::optional<std::string> pivot;  // set on the history path

  friend bool operator==(const CandidateList&, const CandidateList&) = default;
};

/// Candidate list for substituting `word` under attacked label `label`.
///
/// Unseen (word, label): the fallback synonyms in their order. Otherwise the
/// historically tried candidates ranked by mean drop (descending, ties
/// lexicographic); the pivot is the ceil(gamma * |C|)-th of them, and a
/// candidate is kept when the one-sided Welch test against the pivot rejects
/// at level alpha. Candidates where either side has fewer than two samples
/// are kept untested. An empty result collapses to {pivot}.
CandidateList candidate_list(const std::string& word, const HistoryTable& table,
                             ClassIndex label, double gamma, double alpha,
                             const SynonymSet& fallback);

}  // namespace bufferattack
