#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gesturemap/clusterer.hpp"
#include "gesturemap/utf8.hpp"

namespace support {

inline std::filesystem::path fixture_root() { return GESTUREMAP_TEST_FIXTURES; }
inline std::filesystem::path common(const std::string& file) { return fixture_root() / "common" / file; }

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("gesturemap-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::set<std::set<std::string>> as_sets(const gesturemap::Partition& p) {
  std::set<std::set<std::string>> out;
  for (const auto& c : p.clusters) out.insert(std::set<std::string>(c.begin(), c.end()));
  return out;
}

/// Random UTF-8 text drawn from pools that stress the segmenter: ASCII,
/// kana, ideographs, emoji with modifiers and joiners, face parts, brackets,
/// punctuation and white space.
inline std::string random_text(std::mt19937_64& rng, std::size_t max_len = 24) {
  static const std::vector<std::vector<char32_t>> pools = {
      {U'a', U'z', U'Q', U'0', U'9', U'v', U'o', U'd'},
      {U'あ', U'り', U'が', U'と', U'う', U'っ', U'ッ', U'ヨ', U'ー', U'ﾟ'},
      {U'最', U'高', U'卍', U'万', U'次', U'艸', U'皿'},
      {U'\U0001F340', U'\U0001F64F', U'\U0001F60A', U'❤', U'\U0001F44D', U'\U0001F1EF', U'\U0001F1F5', U'#',
       U'\U0001F3FB', U'\uFE0F', U'\u200D', U'\u20E3'},
      {U'ω', U'≧', U'≦', U'´', U'`', U'・', U'･', U'♡', U'*', U'\''},
      {U'(', U')', U'（', U'）', U'[', U']', U'【', U'】'},
      {U'!', U'！', U'?', U'。', U'、', U'～', U'♪', U'.', U'=', U'-', U'☆'},
      {U' ', U'\u3000', U'\t', U'\n'},
      {U'é', U'\u0301', U'一', U'\U00020000', U'\uFFFD', U'\u0000'},
  };
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  std::uniform_int_distribution<std::size_t> pool_dist(0, pools.size() - 1);
  std::string out;
  const std::size_t len = len_dist(rng);
  for (std::size_t i = 0; i < len; ++i) {
    const auto& pool = pools[pool_dist(rng)];
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    gesturemap::utf8::append(out, pool[pick(rng)]);
  }
  return out;
}

}  // namespace support
