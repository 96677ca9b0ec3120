#include "endemic/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "endemic/rng.hpp"
#include "json.hpp"

namespace endemic {

using nlohmann::json;

std::vector<VerifiedClaim> load_claims_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<VerifiedClaim> claims;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      VerifiedClaim c;
      c.id = j.at("id").get<std::string>();
      c.text = j.at("text").get<std::string>();
      if (c.text.empty()) throw std::runtime_error("claim text empty");
      const auto stance = j.at("stance").get<std::string>();
      if (stance == "true_claim")
        c.stance = Stance::kTrueClaim;
      else if (stance == "false_claim")
        c.stance = Stance::kFalseClaim;
      else
        throw std::runtime_error("unknown stance: " + stance);
      c.source = j.value("source", "");
      claims.push_back(std::move(c));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": ingest error: " + e.what());
    }
  }
  return claims;
}

Label weak_label(const Tweet& tweet, const std::vector<VerifiedClaim>& claims,
                 const SentenceEncoder& encoder, double tau_label) {
  if (tau_label <= 0.0 || tau_label >= 1.0)
    throw std::invalid_argument("tau_label must be in (0,1)");
  if (claims.empty()) return Label::kUnlabelled;
  const Eigen::VectorXd t = encoder.encode(tweet.text);
  double best = -2.0;
  const VerifiedClaim* best_claim = nullptr;
  for (const auto& c : claims) {
    const double cos = cosine_similarity(t, encoder.encode(c.text));
    if (cos > best) {
      best = cos;
      best_claim = &c;
    }
  }
  if (best < tau_label || !best_claim) return Label::kUnlabelled;
  return best_claim->stance == Stance::kFalseClaim ? Label::kFake
                                                   : Label::kGenuine;
}

std::vector<RumourCluster> find_rumour_clusters(
    const std::vector<Tweet>& tweets, const SentenceEncoder& encoder,
    double tau_cluster) {
  if (tau_cluster <= 0.0 || tau_cluster >= 1.0)
    throw std::invalid_argument("tau_cluster must be in (0,1)");
  std::vector<RumourCluster> clusters;
  for (const auto& t : tweets) {
    const Eigen::VectorXd e = encoder.encode(t.text);
    int best_id = -1;
    double best_cos = -2.0;
    for (const auto& c : clusters) {
      const double cos = cosine_similarity(e, c.centroid);
      if (cos >= tau_cluster && cos > best_cos) {
        best_cos = cos;
        best_id = c.id;
      }
    }
    if (best_id >= 0) {
      clusters[static_cast<std::size_t>(best_id)].member_tweet_ids.push_back(
          t.id);
    } else {
      RumourCluster c;
      c.id = static_cast<int>(clusters.size());
      c.member_tweet_ids.push_back(t.id);
      c.centroid = e;
      clusters.push_back(std::move(c));
    }
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const RumourCluster& a, const RumourCluster& b) {
                     if (a.size() != b.size()) return a.size() > b.size();
                     return a.id < b.id;
                   });
  return clusters;
}

DatasetSplit build_early_test(const std::vector<RumourCluster>& clusters,
                              const std::vector<Tweet>& tweets, int max_size,
                              std::int64_t max_age_seconds,
                              const DatasetSplit* train,
                              std::int64_t collection_time) {
  if (max_size < 1) throw std::invalid_argument("max_size must be >= 1");
  std::unordered_map<std::string, const Tweet*> by_id;
  std::int64_t newest = 0;
  for (const auto& t : tweets) {
    by_id[t.id] = &t;
    newest = std::max(newest, t.created_at);
  }
  if (collection_time < 0) collection_time = newest;

  DatasetSplit split;
  split.kind = SplitKind::kEarlyTest;
  for (const auto& c : clusters) {
    if (c.size() > max_size) continue;
    for (const auto& id : c.member_tweet_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) continue;
      const Tweet& t = *it->second;
      if (collection_time - t.created_at > max_age_seconds) continue;
      split.tweet_ids.push_back(id);
      if (t.label != Label::kUnlabelled) split.labelled_ids.push_back(id);
    }
  }
  if (train) {
    std::unordered_set<std::string> train_ids(train->tweet_ids.begin(),
                                              train->tweet_ids.end());
    for (const auto& id : split.tweet_ids)
      if (train_ids.count(id))
        throw std::runtime_error("early_test overlaps train split at " + id);
  }
  return split;
}

std::vector<DatasetSplit> make_splits(const std::vector<Tweet>& tweets,
                                      const SentenceEncoder& encoder,
                                      const SplitConfig& cfg) {
  std::vector<Tweet> labelled;
  for (const auto& t : tweets)
    if (t.label != Label::kUnlabelled) labelled.push_back(t);

  const auto clusters =
      find_rumour_clusters(labelled, encoder, cfg.tau_cluster);
  DatasetSplit early = build_early_test(clusters, tweets, cfg.max_cluster_size,
                                        cfg.max_age_seconds);

  std::unordered_set<std::string> early_ids(early.tweet_ids.begin(),
                                            early.tweet_ids.end());
  std::vector<const Tweet*> remaining;
  for (const auto& t : tweets)
    if (!early_ids.count(t.id)) remaining.push_back(&t);

  // Seeded Fisher-Yates, then the prefix becomes general-test.
  Rng rng(cfg.seed);
  for (std::size_t i = remaining.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_int(i);
    std::swap(remaining[i - 1], remaining[j]);
  }
  const std::size_t n_general = static_cast<std::size_t>(
      cfg.general_test_fraction * static_cast<double>(remaining.size()));

  DatasetSplit general;
  general.kind = SplitKind::kGeneralTest;
  DatasetSplit train;
  train.kind = SplitKind::kTrain;
  for (std::size_t i = 0; i < remaining.size(); ++i) {
    DatasetSplit& dst = i < n_general ? general : train;
    dst.tweet_ids.push_back(remaining[i]->id);
    if (remaining[i]->label != Label::kUnlabelled)
      dst.labelled_ids.push_back(remaining[i]->id);
  }
  // Deterministic artifact regardless of shuffle internals.
  for (DatasetSplit* s : {&general, &train}) {
    std::sort(s->tweet_ids.begin(), s->tweet_ids.end());
    std::sort(s->labelled_ids.begin(), s->labelled_ids.end());
  }
  return {train, general, early};
}

}  // namespace endemic
