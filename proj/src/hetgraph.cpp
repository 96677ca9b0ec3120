#include "endemic/hetgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace endemic {

std::string edge_type_name(EdgeType t) {
  switch (t) {
    case EdgeType::kFollow: return "follow";
    case EdgeType::kAuthorship: return "authorship";
    case EdgeType::kRetweet: return "retweet";
  }
  return "follow";
}

EdgeType edge_type_from_name(const std::string& name) {
  if (name == "follow") return EdgeType::kFollow;
  if (name == "authorship") return EdgeType::kAuthorship;
  if (name == "retweet") return EdgeType::kRetweet;
  throw std::runtime_error("unknown edge type: " + name);
}

int HeteroGraph::add_node(const std::string& id, NodeKind kind) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  const int v = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{id, kind});
  adj_.emplace_back();
  index_.emplace(id, v);
  return v;
}

void HeteroGraph::add_edge(int a, int b, EdgeType type) {
  edges_.emplace_back(std::min(a, b), std::max(a, b), type);
  adj_[static_cast<std::size_t>(a)].push_back(b);
  adj_[static_cast<std::size_t>(b)].push_back(a);
}

int HeteroGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

void HeteroGraph::save_edges_tsv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [a, b, type] : edges_) {
    out << node(a).id << "\t" << node(b).id << "\t" << edge_type_name(type)
        << "\n";
  }
}

std::vector<FollowEdge> load_follow_edges_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<FollowEdge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string src, dst, type;
    if (!(ss >> src >> dst))
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'src dst [type]'");
    if (ss >> type && type != "follow")
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": follow edge list has type " + type);
    edges.emplace_back(src, dst);
  }
  return edges;
}

HeteroGraph build_graph(const std::vector<Tweet>& tweets,
                        const std::vector<UserProfile>& users,
                        const std::vector<FollowEdge>& follow_edges,
                        bool include_label_tag) {
  HeteroGraph g;
  for (const auto& u : users) g.add_node(u.id, NodeKind::kUser);
  for (const auto& t : tweets) {
    const int v = g.add_node(t.id, NodeKind::kTweet);
    if (include_label_tag && t.label == Label::kFake) g.node(v).tag_fake = true;
  }

  // one undirected edge per unordered pair and type
  std::set<std::tuple<int, int, EdgeType>> seen;
  auto connect = [&](int a, int b, EdgeType type) {
    auto key = std::make_tuple(std::min(a, b), std::max(a, b), type);
    if (a == b || !seen.insert(key).second) return;
    g.add_edge(a, b, type);
  };

  for (const auto& t : tweets) {
    const int tv = g.index_of(t.id);
    const int uv = g.index_of(t.user_id);
    if (uv < 0 || g.node(uv).kind != NodeKind::kUser)
      throw std::runtime_error("build_graph: unknown user " + t.user_id +
                               " referenced by tweet " + t.id);
    connect(uv, tv, EdgeType::kAuthorship);
    if (t.retweet_of) {
      const int pv = g.index_of(*t.retweet_of);
      if (pv < 0 || g.node(pv).kind != NodeKind::kTweet)
        throw std::runtime_error("build_graph: unknown tweet " +
                                 *t.retweet_of + " retweeted by " + t.id);
      connect(pv, tv, EdgeType::kRetweet);
      g.node(tv).tag_retweet = true;
      g.node(pv).tag_parent = true;
    }
  }
  for (const auto& [src, dst] : follow_edges) {
    const int a = g.index_of(src);
    const int b = g.index_of(dst);
    if (a < 0 || g.node(a).kind != NodeKind::kUser)
      throw std::runtime_error("build_graph: unknown user " + src +
                               " in follow edge");
    if (b < 0 || g.node(b).kind != NodeKind::kUser)
      throw std::runtime_error("build_graph: unknown user " + dst +
                               " in follow edge");
    connect(a, b, EdgeType::kFollow);
  }
  return g;
}

Mat node_feature_matrix(const HeteroGraph& g, bool include_label_tag) {
  const int base = 7;  // kind one-hot (2) + tags (4) + log-degree
  const int dim = base + (include_label_tag ? 1 : 0);
  Mat f = Mat::Zero(g.node_count(), dim);
  for (int v = 0; v < g.node_count(); ++v) {
    const auto& n = g.node(v);
    const bool is_user = n.kind == NodeKind::kUser;
    f(v, 0) = is_user ? 1.0 : 0.0;
    f(v, 1) = is_user ? 0.0 : 1.0;
    f(v, 2) = n.tag_parent ? 1.0 : 0.0;
    f(v, 3) = !is_user ? 1.0 : 0.0;  // tweet tag
    f(v, 4) = n.tag_retweet ? 1.0 : 0.0;
    f(v, 5) = is_user ? 1.0 : 0.0;   // user tag
    f(v, 6) = std::log1p(static_cast<double>(g.degree(v)));
    if (include_label_tag) f(v, 7) = n.tag_fake ? 1.0 : 0.0;
  }
  return f;
}

std::vector<int> sample_walk(const HeteroGraph& g, int start, int length,
                             double teleport, Rng& rng) {
  if (g.node_count() == 0)
    throw std::runtime_error("sample_walk: empty graph");
  if (teleport < 0.0 || teleport > 1.0)
    throw std::invalid_argument("teleport must be in [0,1]");
  std::vector<int> walk;
  walk.reserve(static_cast<std::size_t>(length));
  int cur = start;
  for (int i = 0; i < length; ++i) {
    walk.push_back(cur);
    if (i + 1 == length) break;
    const auto& nbrs = g.neighbors(cur);
    if (nbrs.empty() || rng.uniform() < teleport) {
      cur = static_cast<int>(rng.uniform_int(
          static_cast<std::uint64_t>(g.node_count())));
    } else {
      cur = nbrs[rng.uniform_int(nbrs.size())];
    }
  }
  return walk;
}

SageParams init_sage(int feature_dim, const std::vector<int>& layer_dims,
                     Rng& rng) {
  if (layer_dims.empty())
    throw std::invalid_argument("init_sage: need at least one layer");
  SageParams p;
  int in = feature_dim;
  for (int out : layer_dims) {
    const double s = 1.0 / std::sqrt(static_cast<double>(in));
    SageLayer layer;
    layer.W_self = Mat(out, in);
    layer.W_neigh = Mat(out, in);
    for (Mat* m : {&layer.W_self, &layer.W_neigh})
      for (long i = 0; i < m->rows(); ++i)
        for (long j = 0; j < m->cols(); ++j) (*m)(i, j) = rng.uniform(-s, s);
    p.layers.push_back(std::move(layer));
    in = out;
  }
  return p;
}

namespace {

// Mean over (possibly sampled) neighbor rows, kept sparse via adjacency
// lists. Isolated nodes contribute a zero row.
ad::Var neighbor_mean(ad::Tape& tape, const ad::Var& h,
                      std::vector<std::vector<int>> neigh) {
  const long rows = h.rows();
  const long cols = h.cols();
  Mat value = Mat::Zero(rows, cols);
  for (long v = 0; v < rows; ++v) {
    const auto& ns = neigh[static_cast<std::size_t>(v)];
    if (ns.empty()) continue;
    for (int u : ns) value.row(v) += h.value().row(u);
    value.row(v) /= static_cast<double>(ns.size());
  }
  const int ih = h.id();
  return tape.push(std::move(value), tape.requires_grad(ih),
                   [ih, neigh = std::move(neigh)](ad::Tape& t, int out) {
                     if (!t.requires_grad(ih)) return;
                     Mat& g = t.grad(ih);
                     const Mat& go = t.grad(out);
                     for (long v = 0; v < go.rows(); ++v) {
                       const auto& ns = neigh[static_cast<std::size_t>(v)];
                       if (ns.empty()) continue;
                       const double w = 1.0 / static_cast<double>(ns.size());
                       for (int u : ns) g.row(u) += go.row(v) * w;
                     }
                   });
}

std::vector<std::vector<int>> neighborhoods(const HeteroGraph& g,
                                            int sample_size, Rng* rng) {
  std::vector<std::vector<int>> neigh(
      static_cast<std::size_t>(g.node_count()));
  for (int v = 0; v < g.node_count(); ++v) {
    const auto& ns = g.neighbors(v);
    if (sample_size <= 0 || static_cast<int>(ns.size()) <= sample_size) {
      neigh[static_cast<std::size_t>(v)] = ns;
    } else {
      // partial Fisher-Yates without replacement
      std::vector<int> pool = ns;
      for (int i = 0; i < sample_size; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) +
            rng->uniform_int(pool.size() - static_cast<std::size_t>(i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      }
      pool.resize(static_cast<std::size_t>(sample_size));
      neigh[static_cast<std::size_t>(v)] = std::move(pool);
    }
  }
  return neigh;
}

}  // namespace

ad::Var sage_forward(ad::Binder& binder, const HeteroGraph& g,
                     const Mat& features, const SageParams& params,
                     int sample_size, Rng* rng) {
  if (features.rows() != g.node_count())
    throw std::invalid_argument("sage_forward: feature rows != node count");
  if (params.layers.front().W_self.cols() != features.cols())
    throw std::invalid_argument("sage_forward: feature dim " +
                                std::to_string(features.cols()) +
                                " != layer input dim " +
                                std::to_string(params.layers.front().W_self.cols()));
  if (sample_size > 0 && rng == nullptr)
    throw std::invalid_argument("sampled neighborhoods require an rng");
  ad::Tape& tape = binder.tape();
  ad::Var h = tape.leaf(features);
  for (const auto& layer : params.layers) {
    const ad::Var agg =
        neighbor_mean(tape, h, neighborhoods(g, sample_size, rng));
    const ad::Var self_term = ad::matmul(h, ad::transpose(binder(layer.W_self)));
    const ad::Var neigh_term = ad::matmul(agg, ad::transpose(binder(layer.W_neigh)));
    h = ad::tanh(ad::add(self_term, neigh_term));
  }
  return h;
}

Mat embed_nodes(const HeteroGraph& g, const Mat& features,
                const SageParams& params, const std::vector<int>& nodes,
                int sample_size, Rng* rng) {
  ad::Tape tape;
  ad::Binder binder(tape, false);
  const Mat all = sage_forward(binder, g, features, params, sample_size, rng)
                      .value();
  Mat out(static_cast<long>(nodes.size()), all.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out.row(static_cast<long>(i)) = all.row(nodes[i]);
  return out;
}

ad::Var unsupervised_loss(ad::Binder& binder, const ad::Var& embeddings,
                          const std::vector<WalkPair>& pairs) {
  if (pairs.empty())
    throw std::invalid_argument("unsupervised_loss: no pairs");
  ad::Tape& tape = binder.tape();
  std::vector<ad::Var> terms;
  terms.reserve(pairs.size());
  const int cols = static_cast<int>(embeddings.cols());
  for (const auto& p : pairs) {
    const ad::Var z_u = ad::block(embeddings, p.u, 0, 1, cols);
    const ad::Var z_v = ad::block(embeddings, p.v, 0, 1, cols);
    const ad::Var pos = ad::matmul(z_u, ad::transpose(z_v));  // 1x1
    ad::Var term =
        ad::scale(ad::log_clamped(ad::sigmoid(pos), 1e-12), -1.0);
    for (int vn : p.negatives) {
      const ad::Var z_n = ad::block(embeddings, vn, 0, 1, cols);
      const ad::Var neg =
          ad::scale(ad::matmul(z_u, ad::transpose(z_n)), -1.0);
      term = ad::sub(term, ad::log_clamped(ad::sigmoid(neg), 1e-12));
    }
    terms.push_back(term);
  }
  ad::Var total = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i)
    total = ad::add(total, terms[i]);
  (void)tape;
  return ad::scale(total, 1.0 / static_cast<double>(pairs.size()));
}

SageTrainResult train_unsupervised(const HeteroGraph& g, const Mat& features,
                                   SageParams& params,
                                   const SageTrainConfig& cfg) {
  SageTrainResult result;
  if (cfg.epochs == 0) return result;
  Rng master(cfg.seed);
  const int n = g.node_count();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng = master.derive(static_cast<std::uint64_t>(epoch) + 1);
    // co-occurrence pairs from teleported walks
    std::vector<WalkPair> pairs;
    for (int start = 0; start < n; ++start) {
      for (int w = 0; w < cfg.walks_per_node; ++w) {
        const auto walk =
            sample_walk(g, start, cfg.walk_length, cfg.teleport, rng);
        for (std::size_t i = 0; i < walk.size(); ++i) {
          for (int d = 1; d <= cfg.window; ++d) {
            if (i + static_cast<std::size_t>(d) >= walk.size()) break;
            const int u = walk[i];
            const int v = walk[i + static_cast<std::size_t>(d)];
            if (u == v) continue;
            WalkPair p{u, v, {}};
            p.negatives.reserve(static_cast<std::size_t>(cfg.negatives));
            for (int q = 0; q < cfg.negatives; ++q)
              p.negatives.push_back(static_cast<int>(
                  rng.uniform_int(static_cast<std::uint64_t>(n))));
            pairs.push_back(std::move(p));
          }
        }
      }
    }
    if (pairs.empty()) continue;

    ad::Tape tape;
    ad::Binder binder(tape, true);
    const ad::Var z = sage_forward(binder, g, features, params);
    const ad::Var loss = unsupervised_loss(binder, z, pairs);
    const double loss_val = loss.value()(0, 0);
    if (!std::isfinite(loss_val))
      throw std::runtime_error(
          "train_unsupervised: non-finite loss at epoch " +
          std::to_string(epoch));
    tape.backward(loss);
    for (auto& layer : params.layers) {
      layer.W_self -= cfg.lr * binder.grad_of(layer.W_self);
      layer.W_neigh -= cfg.lr * binder.grad_of(layer.W_neigh);
    }
    result.epoch_losses.push_back(loss_val);
  }
  return result;
}

void save_embeddings(const Mat& embeddings,
                     const std::vector<std::string>& ids,
                     const std::string& bin_path,
                     const std::string& ids_path) {
  if (static_cast<long>(ids.size()) != embeddings.rows())
    throw std::invalid_argument("save_embeddings: ids/rows mismatch");
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + bin_path);
  const std::uint64_t rows = static_cast<std::uint64_t>(embeddings.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(embeddings.cols());
  bin.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  bin.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (long r = 0; r < embeddings.rows(); ++r)
    for (long c = 0; c < embeddings.cols(); ++c) {
      const double v = embeddings(r, c);
      bin.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  std::ofstream idf(ids_path);
  if (!idf) throw std::runtime_error("cannot write " + ids_path);
  for (const auto& id : ids) idf << id << "\n";
}

std::pair<Mat, std::vector<std::string>> load_embeddings(
    const std::string& bin_path, const std::string& ids_path) {
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + bin_path);
  std::uint64_t rows = 0, cols = 0;
  bin.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  bin.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  Mat m(static_cast<long>(rows), static_cast<long>(cols));
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c) {
      double v = 0;
      bin.read(reinterpret_cast<char*>(&v), sizeof(v));
      m(static_cast<long>(r), static_cast<long>(c)) = v;
    }
  if (!bin) throw std::runtime_error("truncated embeddings file " + bin_path);
  std::ifstream idf(ids_path);
  if (!idf) throw std::runtime_error("cannot open " + ids_path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(idf, line)) ids.push_back(line);
  if (static_cast<std::uint64_t>(ids.size()) != rows)
    throw std::runtime_error("embeddings id sidecar length mismatch");
  return {std::move(m), std::move(ids)};
}

}  // namespace endemic
