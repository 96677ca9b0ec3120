#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "endemic/datamodel.hpp"
#include "endemic/encoder.hpp"

namespace endemic {

enum class Stance { kTrueClaim, kFalseClaim };

struct VerifiedClaim {
  std::string id;
  std::string text;
  Stance stance = Stance::kTrueClaim;
  std::string source;
};

std::vector<VerifiedClaim> load_claims_jsonl(const std::string& path);

struct RumourCluster {
  int id = 0;
  std::vector<std::string> member_tweet_ids;
  Eigen::VectorXd centroid;  // the seed member's embedding
  int size() const { return static_cast<int>(member_tweet_ids.size()); }
};

// Label of the most similar claim if max cosine >= tau_label, else
// unlabelled. Empty claim list yields unlabelled. Ties resolve to the
// earliest claim in list order.
Label weak_label(const Tweet& tweet, const std::vector<VerifiedClaim>& claims,
                 const SentenceEncoder& encoder, double tau_label);

// Single-pass threshold clustering in input order: a tweet joins the
// existing cluster whose seed embedding is most cosine-similar (>=
// tau_cluster), otherwise seeds a new cluster. Result is a partition of the
// input sorted by size descending (ties by cluster id).
std::vector<RumourCluster> find_rumour_clusters(
    const std::vector<Tweet>& tweets, const SentenceEncoder& encoder,
    double tau_cluster);

// Members of clusters with size <= max_size whose age at collection time is
// <= max_age_seconds. Collection time defaults to the corpus-wide newest
// created_at. Throws if the result overlaps the train split.
DatasetSplit build_early_test(const std::vector<RumourCluster>& clusters,
                              const std::vector<Tweet>& tweets, int max_size,
                              std::int64_t max_age_seconds,
                              const DatasetSplit* train = nullptr,
                              std::int64_t collection_time = -1);

struct SplitConfig {
  double tau_cluster = 0.8;
  int max_cluster_size = 20;
  std::int64_t max_age_seconds = 86400;
  double general_test_fraction = 0.2;
  std::uint64_t seed = 1;
};

// Full ECTF-style construction: early-test from small fresh rumour clusters,
// general-test sampled from the remainder, train = everything else.
std::vector<DatasetSplit> make_splits(const std::vector<Tweet>& tweets,
                                      const SentenceEncoder& encoder,
                                      const SplitConfig& cfg);

}  // namespace endemic
