#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bufferattack/dataset.hpp"
#include "test_support.hpp"

namespace bufferattack {
namespace {

std::vector<Document> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "mem");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

TEST(Dataset, ParsesRecordsAndSkipsBlankLines) {
  const auto docs = parse(
      "{\"id\":\"a\",\"label\":1,\"text\":\"Good film.\"}\n"
      "\n"
      "{\"label\":0,\"text\":\"bad\"}\n");
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, "a");
  EXPECT_EQ(docs[0].label, 1);
  EXPECT_EQ(docs[0].tokens, (Tokens{"good", "film"}));
  EXPECT_EQ(docs[1].id, "3");
}

TEST(Dataset, ErrorsNameTheLine) {
  EXPECT_NE(error_of("{\"label\":0,\"text\":\"x\"}\n{oops\n").find("mem:2"), std::string::npos);
  EXPECT_NE(error_of("{\"text\":\"x\"}").find("mem:1"), std::string::npos);
  EXPECT_NE(error_of("{\"label\":-1,\"text\":\"x\"}").find("label"), std::string::npos);
  EXPECT_NE(error_of("{\"label\":1.5,\"text\":\"x\"}").find("label"), std::string::npos);
  EXPECT_NE(error_of("{\"label\":0,\"text\":3}").find("text"), std::string::npos);
  EXPECT_NE(error_of("{\"label\":0,\"text\":\"...\"}").find("no tokens"), std::string::npos);
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "bufferattack_dataset_test";
  std::filesystem::create_directories(dir);
  const std::vector<Document> docs{{"x1", {"a", "fine", "day"}, 1}, {"x2", {"grim"}, 0}};
  save_dataset(dir / "d.jsonl", docs);
  EXPECT_EQ(load_dataset(dir / "d.jsonl"), docs);
  std::filesystem::remove_all(dir);
}

TEST(Dataset, MissingFileIsIoError) {
  EXPECT_THROW(load_dataset("/nonexistent/file.jsonl"), IoError);
  EXPECT_THROW(load_word_list("/nonexistent/words.txt"), IoError);
}

TEST(Dataset, WordListSkipsComments) {
  const auto words = load_word_list(testing::kDataDir + "/stopwords.txt");
  EXPECT_TRUE(words.count("the"));
  for (const auto& w : words) EXPECT_NE(w.front(), '#');
}

TEST(Dataset, ShippedCorpusSizes) {
  const auto& world = testing::ToyWorld::get();
  EXPECT_EQ(world.train.size(), 2000u);
  EXPECT_EQ(world.attack.size(), 200u);
}

}  // namespace
}  // namespace bufferattack
