#pragma once

#include <filesystem>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bufferattack/core.hpp"

namespace bufferattack {

/// Dense word vectors, one row per word. Immutable after construction.
class EmbeddingTable {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  EmbeddingTable() = default;
  // Words must be unique and match the row count.
  EmbeddingTable(std::vector<std::string> words, Matrix vectors);

  /// Text format, one "word v1 ... vd" record per line. An optional leading
  /// "count dim" header (word2vec style) is skipped. Duplicate words keep
  /// the first occurrence. Throws FormatError naming the line on an arity
  /// mismatch, and on an empty input.
  static EmbeddingTable load(const std::filesystem::path& path);
  static EmbeddingTable parse(std::istream& in, const std::string& source = "<stream>");

  Eigen::Index dim() const { return vectors_.cols(); }
  std::size_t size() const { return words_.size(); }

  std::optional<Eigen::Index> index_of(std::string_view word) const;
  bool contains(std::string_view word) const { return index_of(word).has_value(); }
  const std::string& word(Eigen::Index i) const { return words_[static_cast<std::size_t>(i)]; }
  auto vector(Eigen::Index i) const { return vectors_.row(i).transpose(); }
  const Matrix& matrix() const { return vectors_; }

 private:
  std::vector<std::string> words_;
  Matrix vectors_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

template <typename A, typename B>
double cosine(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("cosine: zero-norm vector");
  return u.dot(v) / (nu * nv);
}

struct SynonymSet {
  std::string word;
  // Descending cosine, ties in lexicographic word order.
  std::vector<std::pair<std::string, double>> candidates;

  std::vector<std::string> words() const;
  bool empty() const { return candidates.empty(); }
  std::size_t size() const { return candidates.size(); }
};

/// Top-n vocabulary words with cosine strictly above `min_sim`, excluding the
/// word itself. Unknown words yield an empty set.
SynonymSet synonyms(std::string_view word, const EmbeddingTable& table, std::size_t n,
                    double min_sim);

/// Cosine between the mean-pooled vectors of the known tokens of each side.
/// 0 if either side has no known token; exactly 1 when the pooled vectors are
/// equal.
double sentence_similarity(const Tokens& a, const Tokens& b, const EmbeddingTable& table);
inline double sentence_similarity(const Document& a, const Document& b,
                                  const EmbeddingTable& table) {
  return sentence_similarity(a.tokens, b.tokens, table);
}

/// Embedding table plus a memoized synonym provider with fixed (n, min_sim).
/// Safe for concurrent readers.
class Lexicon {
 public:
  Lexicon(std::shared_ptr<const EmbeddingTable> table, std::size_t top_n, double min_sim);

  const EmbeddingTable& table() const { return *table_; }
  const std::shared_ptr<const EmbeddingTable>& shared_table() const { return table_; }
  std::size_t top_n() const { return top_n_; }
  double min_sim() const { return min_sim_; }

  const SynonymSet& synonyms(const std::string& word) const;
  double similarity(const Tokens& a, const Tokens& b) const {
    return sentence_similarity(a, b, *table_);
  }

 private:
  std::shared_ptr<const EmbeddingTable> table_;
  std::size_t top_n_;
  double min_sim_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, SynonymSet> cache_;
};

}  // namespace bufferattack
