#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace endemic {

// Lowercases, maps URLs to "<url>" and @mentions to "<mention>", then splits
// on anything outside [a-z0-9'].
std::vector<std::string> tokenize(const std::string& text);

// Splits on terminal punctuation (.!?) followed by whitespace or end of text.
std::vector<std::string> split_sentences(const std::string& text);

// Token -> dense index map. Index 0 is PAD, index 1 is UNK.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  // Builds from token frequencies of the given texts; tokens ordered by
  // (frequency desc, token asc) and truncated to max_size (specials included).
  static Vocabulary build(const std::vector<std::string>& texts,
                          std::size_t max_size);

  int index_of(const std::string& token) const;
  const std::string& token_at(int index) const { return tokens_[index]; }
  std::size_t size() const { return tokens_.size(); }

  // Token indices for a text, truncated / PAD-padded to exactly n.
  std::vector<int> encode(const std::string& text, int n) const;

  // vocab.txt: one token per line, line number = index.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  void push(const std::string& token);
};

}  // namespace endemic
