#include "endemic/knowledge.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "endemic/text.hpp"
#include "json.hpp"

namespace endemic {

using nlohmann::json;

FetchMode fetch_mode_from_name(const std::string& name) {
  if (name == "train_time") return FetchMode::kTrainTime;
  if (name == "test_time") return FetchMode::kTestTime;
  throw std::runtime_error("unknown fetch mode: " + name);
}

std::string fetch_mode_name(FetchMode m) {
  return m == FetchMode::kTrainTime ? "train_time" : "test_time";
}

EvidenceStore EvidenceStore::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  EvidenceStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      EvidenceDocument d;
      d.url = j.at("url").get<std::string>();
      d.domain = j.at("domain").get<std::string>();
      d.publish_time = j.at("publish_time").get<std::int64_t>();
      if (d.publish_time <= 0)
        throw std::runtime_error("publish_time must be > 0");
      if (j.contains("sentences"))
        d.sentences = j["sentences"].get<std::vector<std::string>>();
      else if (j.contains("text"))
        d.sentences = split_sentences(j["text"].get<std::string>());
      store.add(j.at("tweet_id").get<std::string>(), std::move(d));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": ingest error: " + e.what());
    }
  }
  return store;
}

void EvidenceStore::add(const std::string& tweet_id, EvidenceDocument doc) {
  docs_[tweet_id].push_back(std::move(doc));
}

const std::vector<EvidenceDocument>* EvidenceStore::lookup(
    const std::string& tweet_id) const {
  auto it = docs_.find(tweet_id);
  return it == docs_.end() ? nullptr : &it->second;
}

void EvidenceStore::save_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::vector<std::string> keys;
  keys.reserve(docs_.size());
  for (const auto& [k, v] : docs_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (const auto& k : keys) {
    for (const auto& d : docs_.at(k)) {
      json j;
      j["tweet_id"] = k;
      j["url"] = d.url;
      j["domain"] = d.domain;
      j["publish_time"] = d.publish_time;
      j["sentences"] = d.sentences;
      out << j.dump() << "\n";
    }
  }
}

std::size_t EvidenceStore::size() const {
  std::size_t n = 0;
  for (const auto& [k, v] : docs_) n += v.size();
  return n;
}

std::vector<EvidenceDocument> fetch_documents(const Tweet& tweet,
                                              const EvidenceStore& store,
                                              FetchMode mode) {
  const auto* docs = store.lookup(tweet.id);
  if (!docs) return {};
  std::vector<EvidenceDocument> out;
  if (mode == FetchMode::kTrainTime) {
    for (const auto& d : *docs)
      if (d.publish_time <= tweet.created_at) out.push_back(d);
  } else {
    out = *docs;
    std::stable_sort(out.begin(), out.end(),
                     [](const EvidenceDocument& a, const EvidenceDocument& b) {
                       return a.publish_time > b.publish_time;
                     });
  }
  return out;
}

EvidenceSet select_evidence(const Tweet& tweet,
                            const std::vector<EvidenceDocument>& docs,
                            const SentenceEncoder& encoder,
                            const SelectOptions& opts) {
  if (opts.epsilon <= 0.0 || opts.epsilon >= 1.0)
    throw std::invalid_argument("epsilon must be in (0,1)");
  const Eigen::VectorXd tweet_enc = encoder.encode(tweet.text);

  struct Candidate {
    SelectedSentence s;
    std::string domain;
  };
  std::vector<Candidate> qualifying;
  for (const auto& d : docs) {
    for (const auto& sent : d.sentences) {
      Eigen::VectorXd enc = encoder.encode(sent);
      const double cos = cosine_similarity(enc, tweet_enc);
      if (cos >= opts.epsilon)
        qualifying.push_back({{sent, d.url, std::move(enc), cos}, d.domain});
    }
  }
  if (opts.similarity_sorted) {
    std::stable_sort(qualifying.begin(), qualifying.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.s.cosine > b.s.cosine;
                     });
  }

  EvidenceSet set;
  set.tweet_id = tweet.id;
  std::unordered_map<std::string, int> per_domain;
  for (auto& c : qualifying) {
    if (static_cast<int>(set.selected.size()) >= kEvidenceCap) break;
    int& n = per_domain[c.domain];
    if (n >= kPerDomainCap) continue;
    ++n;
    set.selected.push_back(std::move(c.s));
  }
  return set;
}

Eigen::MatrixXd EvidenceSet::to_tensor(int dim) const {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(kEvidenceCap, dim);
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i].encoding.size() != dim)
      throw std::runtime_error("evidence encoding dim mismatch");
    t.row(static_cast<long>(i)) = selected[i].encoding.transpose();
  }
  return t;
}

void save_evidence_sets_jsonl(const std::vector<EvidenceSet>& sets,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& s : sets) {
    json j;
    j["tweet_id"] = s.tweet_id;
    json arr = json::array();
    for (const auto& sel : s.selected) {
      json e;
      e["text"] = sel.text;
      e["source_url"] = sel.source_url;
      e["cosine"] = sel.cosine;
      std::vector<double> enc(sel.encoding.data(),
                              sel.encoding.data() + sel.encoding.size());
      e["encoding"] = enc;
      arr.push_back(std::move(e));
    }
    j["selected"] = arr;
    out << j.dump() << "\n";
  }
}

std::vector<EvidenceSet> load_evidence_sets_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<EvidenceSet> sets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      EvidenceSet s;
      s.tweet_id = j.at("tweet_id").get<std::string>();
      for (const auto& e : j.at("selected")) {
        SelectedSentence sel;
        sel.text = e.at("text").get<std::string>();
        sel.source_url = e.at("source_url").get<std::string>();
        sel.cosine = e.value("cosine", 0.0);
        const auto enc = e.at("encoding").get<std::vector<double>>();
        sel.encoding = Eigen::Map<const Eigen::VectorXd>(
            enc.data(), static_cast<long>(enc.size()));
        s.selected.push_back(std::move(sel));
      }
      if (static_cast<int>(s.selected.size()) > kEvidenceCap)
        throw std::runtime_error("evidence set exceeds cap");
      sets.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": ingest error: " + e.what());
    }
  }
  return sets;
}

}  // namespace endemic
