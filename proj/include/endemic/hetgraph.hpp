#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "endemic/ad.hpp"
#include "endemic/datamodel.hpp"
#include "endemic/rng.hpp"

namespace endemic {

using ad::Mat;

enum class NodeKind { kUser, kTweet };
enum class EdgeType { kFollow, kAuthorship, kRetweet };

std::string edge_type_name(EdgeType t);
EdgeType edge_type_from_name(const std::string& name);

// Undirected typed graph over user and tweet nodes. Edges are stored once;
// adjacency lists answer neighbor queries symmetric in both endpoints. No
// dense |V| x |V| structure is ever allocated.
class HeteroGraph {
 public:
  struct Node {
    std::string id;
    NodeKind kind;
    bool tag_parent = false;   // some tweet retweets this one
    bool tag_retweet = false;  // this tweet is a retweet
    bool tag_fake = false;     // veracity characteristic (ablation only)
  };

  int add_node(const std::string& id, NodeKind kind);
  void add_edge(int a, int b, EdgeType type);

  int index_of(const std::string& id) const;  // -1 when absent
  const Node& node(int v) const { return nodes_[static_cast<std::size_t>(v)]; }
  Node& node(int v) { return nodes_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& neighbors(int v) const {
    return adj_[static_cast<std::size_t>(v)];
  }
  int degree(int v) const {
    return static_cast<int>(adj_[static_cast<std::size_t>(v)].size());
  }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<std::tuple<int, int, EdgeType>>& edges() const {
    return edges_;
  }

  // edges.tsv: "src<TAB>dst<TAB>type" per line.
  void save_edges_tsv(const std::string& path) const;

 private:
  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::tuple<int, int, EdgeType>> edges_;
};

using FollowEdge = std::pair<std::string, std::string>;

std::vector<FollowEdge> load_follow_edges_tsv(const std::string& path);

// Authorship edge per (author, tweet), retweet edge per retweet_of link,
// follow edge per input pair with direction dropped. Dangling references
// throw, naming the offending id. include_label_tag adds a "fake tweet"
// node characteristic for ablation runs (leaks veracity labels into the
// graph; off by default).
HeteroGraph build_graph(const std::vector<Tweet>& tweets,
                        const std::vector<UserProfile>& users,
                        const std::vector<FollowEdge>& follow_edges,
                        bool include_label_tag = false);

// Node feature rows: one-hot kind (2) + type tags (parent, tweet, retweet,
// user) + log(1 + degree), plus the fake tag column when enabled.
Mat node_feature_matrix(const HeteroGraph& g, bool include_label_tag = false);

// Random walk: with probability `teleport` jump to a uniformly random node,
// otherwise step to a uniformly random neighbor. Isolated nodes always
// teleport. Returns `length` nodes starting at `start`.
std::vector<int> sample_walk(const HeteroGraph& g, int start, int length,
                             double teleport, Rng& rng);

struct SageLayer {
  Mat W_self;   // out x in
  Mat W_neigh;  // out x in
};

struct SageParams {
  std::vector<SageLayer> layers;
  int output_dim() const {
    return static_cast<int>(layers.back().W_self.rows());
  }
};

// Layer dims chain feature_dim -> ... -> output_dim (one entry per layer
// output).
SageParams init_sage(int feature_dim, const std::vector<int>& layer_dims,
                     Rng& rng);

// Full-neighborhood mean-aggregation forward for every node:
//   H_{l+1} = tanh(H_l W_self^T + mean_neigh(H_l) W_neigh^T)
// Isolated nodes aggregate a zero vector. Pass sample_size > 0 with an rng
// to aggregate over a sampled neighbor subset instead (inductive on any
// graph whose feature rows match).
ad::Var sage_forward(ad::Binder& binder, const HeteroGraph& g,
                     const Mat& features, const SageParams& params,
                     int sample_size = 0, Rng* rng = nullptr);

// Embedding rows for the requested nodes (forward-only).
Mat embed_nodes(const HeteroGraph& g, const Mat& features,
                const SageParams& params, const std::vector<int>& nodes,
                int sample_size = 0, Rng* rng = nullptr);

struct WalkPair {
  int u;
  int v;
  std::vector<int> negatives;
};

// Skip-gram style objective over co-occurring walk pairs:
//   J = -log sigmoid(z_u . z_v) - sum_neg log sigmoid(-z_u . z_neg)
// averaged over pairs. z rows come from sage_forward.
ad::Var unsupervised_loss(ad::Binder& binder, const ad::Var& embeddings,
                          const std::vector<WalkPair>& pairs);

struct SageTrainConfig {
  int walk_length = 5;
  int walks_per_node = 10;
  int window = 2;
  int negatives = 5;  // Q
  int epochs = 30;
  double lr = 0.01;
  double teleport = 0.3;
  std::uint64_t seed = 7;
};

struct SageTrainResult {
  std::vector<double> epoch_losses;
};

// Unsupervised training over teleported-walk co-occurrence pairs with
// uniform negative sampling. Updates params in place. Aborts with a
// diagnostic on non-finite loss.
SageTrainResult train_unsupervised(const HeteroGraph& g, const Mat& features,
                                   SageParams& params,
                                   const SageTrainConfig& cfg);

// Binary matrix + id-index sidecar (one node id per line, row order).
void save_embeddings(const Mat& embeddings,
                     const std::vector<std::string>& ids,
                     const std::string& bin_path,
                     const std::string& ids_path);
std::pair<Mat, std::vector<std::string>> load_embeddings(
    const std::string& bin_path, const std::string& ids_path);

}  // namespace endemic
