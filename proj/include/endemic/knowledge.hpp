#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "endemic/datamodel.hpp"
#include "endemic/encoder.hpp"

namespace endemic {

inline constexpr int kEvidenceCap = 50;
inline constexpr int kPerDomainCap = 10;

struct EvidenceDocument {
  std::string url;
  std::string domain;
  std::int64_t publish_time = 0;  // UTC seconds
  std::vector<std::string> sentences;
};

enum class FetchMode { kTrainTime, kTestTime };

FetchMode fetch_mode_from_name(const std::string& name);
std::string fetch_mode_name(FetchMode m);

// File-backed store of pre-fetched search results keyed by tweet id. A live
// retrieval client can implement the same lookup contract; tests stay
// hermetic on fixtures.
class EvidenceStore {
 public:
  EvidenceStore() = default;
  static EvidenceStore load_jsonl(const std::string& path);
  void add(const std::string& tweet_id, EvidenceDocument doc);
  const std::vector<EvidenceDocument>* lookup(const std::string& tweet_id) const;
  void save_jsonl(const std::string& path) const;
  std::size_t size() const;

 private:
  std::unordered_map<std::string, std::vector<EvidenceDocument>> docs_;
};

// train_time keeps only documents published at or before the tweet, in store
// order; test_time returns everything, newest first (ties keep store order).
// A store miss is the weak-signal case and yields an empty list.
std::vector<EvidenceDocument> fetch_documents(const Tweet& tweet,
                                              const EvidenceStore& store,
                                              FetchMode mode);

struct SelectedSentence {
  std::string text;
  std::string source_url;
  Eigen::VectorXd encoding;  // dim K
  double cosine = 0.0;
};

struct EvidenceSet {
  std::string tweet_id;
  std::vector<SelectedSentence> selected;  // at most kEvidenceCap

  // (kEvidenceCap x K) tensor; missing rows are zero.
  Eigen::MatrixXd to_tensor(int dim) const;
};

struct SelectOptions {
  double epsilon = 0.8;
  bool similarity_sorted = false;  // rank qualifying sentences by cosine desc
};

// Scans sentences in document order, keeping those whose encoding has cosine
// >= epsilon with the tweet encoding, stopping at kEvidenceCap total with at
// most kPerDomainCap per domain. similarity_sorted instead ranks all
// qualifying sentences by cosine (desc, stable) before applying the caps.
EvidenceSet select_evidence(const Tweet& tweet,
                            const std::vector<EvidenceDocument>& docs,
                            const SentenceEncoder& encoder,
                            const SelectOptions& opts);

// evidence_sets.jsonl round-trip (selected sentences with encodings).
void save_evidence_sets_jsonl(const std::vector<EvidenceSet>& sets,
                              const std::string& path);
std::vector<EvidenceSet> load_evidence_sets_jsonl(const std::string& path);

}  // namespace endemic
