#include "bufferattack/buffer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bufferattack/stats.hpp"
#include "json.hpp"

namespace bufferattack {

using nlohmann::json;

namespace {

constexpr int kTableVersion = 1;
constexpr char kSep = '\x1f';

}  // namespace

void HistoryTable::record(const std::string& word, ClassIndex label, const std::string& candidate,
                          double delta) {
  if (!(delta >= -1.0 && delta <= 1.0))
    throw std::invalid_argument("history delta outside [-1,1]");
  if (word.find(kSep) != std::string::npos || candidate.find(kSep) != std::string::npos)
    throw std::invalid_argument("history key contains the unit separator");
  entries_[{word, label}][candidate].push_back(delta);
}

const HistoryTable::CandidateHistory* HistoryTable::lookup(const std::string& word,
                                                           ClassIndex label) const {
  auto it = entries_.find({word, label});
  return it == entries_.end() ? nullptr : &it->second;
}

const HistoryTable::Samples* HistoryTable::samples(const std::string& word, ClassIndex label,
                                                   const std::string& candidate) const {
  const auto* h = lookup(word, label);
  if (!h) return nullptr;
  auto it = h->find(candidate);
  return it == h->end() ? nullptr : &it->second;
}

std::size_t HistoryTable::key_count() const {
  std::size_t n = 0;
  for (const auto& [k, h] : entries_) n += h.size();
  return n;
}

std::size_t HistoryTable::sample_count() const {
  std::size_t n = 0;
  for (const auto& [k, h] : entries_)
    for (const auto& [c, s] : h) n += s.size();
  return n;
}

std::string HistoryTable::to_json() const {
  json entries = json::object();
  for (const auto& [key, hist] : entries_)
    for (const auto& [cand, samples] : hist)
      entries[key.first + kSep + std::to_string(key.second) + kSep + cand] = samples;
  json j = {{"version", kTableVersion},
            {"metadata",
             {{"created_by", metadata_.created_by},
              {"config_fingerprint", metadata_.config_fingerprint}}},
            {"entries", entries}};
  return j.dump() + "\n";
}

HistoryTable HistoryTable::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("history table: corrupt file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer())
    throw FormatError("history table: missing version");
  if (j["version"].get<int>() != kTableVersion)
    throw FormatError("history table: version mismatch (found " +
                      std::to_string(j["version"].get<int>()) + ")");
  HistoryTable t;
  try {
    if (j.contains("metadata")) {
      const auto& m = j["metadata"];
      t.metadata_.created_by = m.value("created_by", "");
      t.metadata_.config_fingerprint = m.value("config_fingerprint", "");
    }
    for (const auto& [key, samples] : j.at("entries").items()) {
      const auto a = key.find(kSep);
      const auto b = a == std::string::npos ? a : key.find(kSep, a + 1);
      if (b == std::string::npos) throw FormatError("history table: malformed key");
      const std::string word = key.substr(0, a);
      const std::string label_text = key.substr(a + 1, b - a - 1);
      const std::string cand = key.substr(b + 1);
      std::size_t used = 0;
      const int label = std::stoi(label_text, &used);
      if (used != label_text.size()) throw FormatError("history table: malformed label");
      if (!samples.is_array()) throw FormatError("history table: samples must be an array");
      auto& dst = t.entries_[{word, label}][cand];
      for (const auto& v : samples) {
        const double d = v.get<double>();
        if (!(d >= -1.0 && d <= 1.0)) throw FormatError("history table: delta outside [-1,1]");
        dst.push_back(d);
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("history table: ") + e.what());
  } catch (const std::logic_error& e) {
    throw FormatError(std::string("history table: ") + e.what());
  }
  return t;
}

void HistoryTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write history table " + path.string());
  out << to_json();
  if (!out) throw IoError("write failed for " + path.string());
}

HistoryTable HistoryTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open history table " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

CandidateList candidate_list(const std::string& word, const HistoryTable& table,
                             ClassIndex label, double gamma, double alpha,
                             const SynonymSet& fallback) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma out of (0,1]");
  CandidateList out;
  out.word = word;
  const auto* history = table.lookup(word, label);
  if (!history || history->empty()) {
    out.candidates = fallback.words();
    return out;
  }
  out.source = CandidateList::Source::kHistory;

  struct Ranked {
    const std::string* word;
    stats::SampleSummary summary;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(history->size());
  for (const auto& [cand, samples] : *history)
    ranked.push_back({&cand, stats::SampleSummary::of(samples)});
  // Map order is lexicographic, so a stable sort leaves mean ties lexicographic.
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.summary.mean > b.summary.mean;
  });

  const auto n = ranked.size();
  auto k = static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  const Ranked& pivot = ranked[k - 1];
  out.pivot = *pivot.word;

  for (const auto& r : ranked) {
    const bool untestable = r.summary.n < 2 || pivot.summary.n < 2;
    if (untestable) {
      out.candidates.push_back(*r.word);
    } else if (&r != &pivot &&
               stats::one_sided_test(r.summary, pivot.summary, alpha).rejected) {
      out.candidates.push_back(*r.word);
    }
  }
  if (out.candidates.empty()) out.candidates.push_back(*pivot.word);
  return out;
}

}  // namespace bufferattack
