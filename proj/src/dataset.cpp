#include "bufferattack/dataset.hpp"

#include <fstream>

#include "json.hpp"

namespace bufferattack {

using nlohmann::json;

std::vector<Document> parse_dataset(std::istream& in, const std::string& source) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    if (!rec.is_object() || !rec.contains("label") || !rec.contains("text"))
      throw FormatError(where + ": record needs \"label\" and \"text\"");
    if (!rec["label"].is_number_integer() || rec["label"].get<long long>() < 0)
      throw FormatError(where + ": label must be a non-negative integer");
    if (!rec["text"].is_string()) throw FormatError(where + ": text must be a string");
    Document doc;
    doc.id = rec.contains("id") && rec["id"].is_string() ? rec["id"].get<std::string>()
                                                         : std::to_string(lineno);
    doc.label = rec["label"].get<int>();
    doc.tokens = tokenize(rec["text"].get<std::string>());
    if (doc.tokens.empty()) throw FormatError(where + ": text has no tokens");
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return parse_dataset(in, path.string());
}

void save_dataset(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset " + path.string());
  for (const auto& d : docs) {
    json rec = {{"id", d.id}, {"label", d.label}, {"text", join_tokens(d.tokens)}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::set<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto toks = tokenize(line);
    if (line.empty() || line[0] == '#' || toks.empty()) continue;
    words.insert(toks.front());
  }
  return words;
}

}  // namespace bufferattack
