#include "bufferattack/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace bufferattack {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool is_count_header(const std::vector<std::string_view>& fields) {
  if (fields.size() != 2) return false;
  for (auto f : fields)
    if (f.empty() || !std::all_of(f.begin(), f.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return false;
  return true;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Matrix vectors)
    : words_(std::move(words)), vectors_(std::move(vectors)) {
  if (static_cast<Eigen::Index>(words_.size()) != vectors_.rows())
    throw std::invalid_argument("EmbeddingTable: word count does not match rows");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (!index_.emplace(words_[i], static_cast<Eigen::Index>(i)).second)
      throw std::invalid_argument("EmbeddingTable: duplicate word " + words_[i]);
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings " + path.string());
  return parse(in, path.string());
}

EmbeddingTable EmbeddingTable::parse(std::istream& in, const std::string& source) {
  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_map<std::string, bool> seen;
  Eigen::Index dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (dim == 0 && words.empty() && is_count_header(fields)) continue;
    const auto arity = static_cast<Eigen::Index>(fields.size()) - 1;
    if (arity < 1)
      throw FormatError(source + ":" + std::to_string(lineno) + ": record has no vector");
    if (dim == 0) dim = arity;
    if (arity != dim)
      throw FormatError(source + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(dim) + " values, found " + std::to_string(arity));
    std::string word(fields[0]);
    if (!seen.emplace(word, true).second) continue;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      if (!parse_double(fields[k], v))
        throw FormatError(source + ":" + std::to_string(lineno) + ": bad number '" +
                          std::string(fields[k]) + "'");
      values.push_back(v);
    }
    words.push_back(std::move(word));
  }
  if (words.empty()) throw FormatError(source + ": no embedding records");
  Matrix m = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(words.size()), dim);
  return EmbeddingTable(std::move(words), std::move(m));
}

std::optional<Eigen::Index> EmbeddingTable::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> SynonymSet::words() const {
  std::vector<std::string> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.first);
  return out;
}

SynonymSet synonyms(std::string_view word, const EmbeddingTable& table, std::size_t n,
                    double min_sim) {
  SynonymSet out{std::string(word), {}};
  const auto idx = table.index_of(word);
  if (!idx || n == 0) return out;
  const Eigen::VectorXd v = table.vector(*idx);
  const double nv = v.norm();
  if (nv == 0.0) return out;

  const auto& m = table.matrix();
  const Eigen::VectorXd dots = m * v;
  const Eigen::VectorXd norms = m.rowwise().norm();
  // The matrix product only shortlists; the reported cosine is recomputed
  // pairwise so it agrees bit-for-bit with cosine().
  constexpr double kSlack = 1e-9;
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    if (j == *idx || norms(j) == 0.0) continue;
    if (dots(j) / (norms(j) * nv) <= min_sim - kSlack) continue;
    const double c = cosine(table.vector(j), v);
    if (c > min_sim) out.candidates.emplace_back(table.word(j), c);
  }
  std::sort(out.candidates.begin(), out.candidates.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (out.candidates.size() > n) out.candidates.resize(n);
  return out;
}

double sentence_similarity(const Tokens& a, const Tokens& b, const EmbeddingTable& table) {
  auto pooled = [&](const Tokens& toks) -> std::optional<Eigen::VectorXd> {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim());
    std::size_t known = 0;
    for (const auto& t : toks) {
      if (auto i = table.index_of(t)) {
        sum += table.vector(*i);
        ++known;
      }
    }
    if (known == 0) return std::nullopt;
    return sum / static_cast<double>(known);
  };
  const auto pa = pooled(a);
  const auto pb = pooled(b);
  if (!pa || !pb) return 0.0;
  if (*pa == *pb) return 1.0;
  const double na = pa->norm(), nb = pb->norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(pa->dot(*pb) / (na * nb), -1.0, 1.0);
}

Lexicon::Lexicon(std::shared_ptr<const EmbeddingTable> table, std::size_t top_n, double min_sim)
    : table_(std::move(table)), top_n_(top_n), min_sim_(min_sim) {
  if (!table_) throw std::invalid_argument("Lexicon: null embedding table");
}

const SynonymSet& Lexicon::synonyms(const std::string& word) const {
  std::lock_guard lock(mu_);
  auto it = cache_.find(word);
  if (it == cache_.end())
    it = cache_.emplace(word, bufferattack::synonyms(word, *table_, top_n_, min_sim_)).first;
  return it->second;
}

}  // namespace bufferattack
