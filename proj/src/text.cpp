#include "endemic/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

namespace endemic {

namespace {

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'';
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string chunk;
  auto flush_chunk = [&]() {
    if (chunk.empty()) return;
    if (starts_with(chunk, "http://") || starts_with(chunk, "https://") ||
        starts_with(chunk, "www.")) {
      tokens.push_back("<url>");
    } else if (chunk.size() > 1 && chunk[0] == '@') {
      tokens.push_back("<mention>");
    } else {
      std::string cur;
      for (char c : chunk) {
        if (is_token_char(c)) {
          cur.push_back(c);
        } else if (!cur.empty()) {
          tokens.push_back(cur);
          cur.clear();
        }
      }
      if (!cur.empty()) tokens.push_back(cur);
    }
    chunk.clear();
  };
  for (char raw : text) {
    const char c = static_cast<char>(
        std::tolower(static_cast<unsigned char>(raw)));
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush_chunk();
    } else {
      chunk.push_back(c);
    }
  }
  flush_chunk();
  return tokens;
}

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> sentences;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    cur.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      // absorb any punctuation run
      while (i + 1 < text.size() &&
             (text[i + 1] == '.' || text[i + 1] == '!' || text[i + 1] == '?')) {
        cur.push_back(text[++i]);
      }
      if (i + 1 >= text.size() ||
          std::isspace(static_cast<unsigned char>(text[i + 1]))) {
        while (!cur.empty() &&
               std::isspace(static_cast<unsigned char>(cur.front())))
          cur.erase(cur.begin());
        if (!cur.empty()) sentences.push_back(cur);
        cur.clear();
      }
    }
  }
  while (!cur.empty() && std::isspace(static_cast<unsigned char>(cur.front())))
    cur.erase(cur.begin());
  while (!cur.empty() && std::isspace(static_cast<unsigned char>(cur.back())))
    cur.pop_back();
  if (!cur.empty()) sentences.push_back(cur);
  return sentences;
}

Vocabulary::Vocabulary() {
  push("<pad>");
  push("<unk>");
}

void Vocabulary::push(const std::string& token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts,
                             std::size_t max_size) {
  std::map<std::string, std::size_t> freq;
  for (const auto& text : texts)
    for (const auto& tok : tokenize(text)) ++freq[tok];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(),
                                                          freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [tok, n] : ranked) {
    if (v.size() >= max_size) break;
    if (!v.index_.count(tok)) v.push(tok);
  }
  return v;
}

int Vocabulary::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::encode(const std::string& text, int n) const {
  std::vector<int> ids(static_cast<std::size_t>(n), kPad);
  const auto tokens = tokenize(text);
  for (int i = 0; i < n && i < static_cast<int>(tokens.size()); ++i)
    ids[static_cast<std::size_t>(i)] = index_of(tokens[static_cast<std::size_t>(i)]);
  return ids;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& tok : tokens_) out << tok << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Vocabulary v;
  v.tokens_.clear();
  v.index_.clear();
  std::string line;
  while (std::getline(in, line)) v.push(line);
  if (v.size() < 2 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<unk>")
    throw std::runtime_error(path + ": vocab must start with <pad>, <unk>");
  return v;
}

}  // namespace endemic
