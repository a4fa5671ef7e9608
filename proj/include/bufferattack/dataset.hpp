#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "bufferattack/core.hpp"

namespace bufferattack {

// JSON Lines, one {"id": str, "label": int, "text": str} object per line.
// Blank lines are ignored. Malformed records throw FormatError naming the line.
std::vector<Document> load_dataset(const std::filesystem::path& path);
std::vector<Document> parse_dataset(std::istream& in, const std::string& source = "<stream>");

void save_dataset(const std::filesystem::path& path, const std::vector<Document>& docs);

// One word per line; '#' starts a comment line.
std::set<std::string> load_word_list(const std::filesystem::path& path);

}  // namespace bufferattack
