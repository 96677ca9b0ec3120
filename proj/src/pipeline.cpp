#include "endemic/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "endemic/corpus.hpp"
#include "endemic/evalharness.hpp"
#include "endemic/knowledge.hpp"
#include "endemic/model.hpp"
#include "endemic/rng.hpp"
#include "endemic/training.hpp"
#include "json.hpp"

namespace endemic {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return hex64(h);
}

namespace {

// Tracks artifacts so a failed command leaves nothing behind.
class Run {
 public:
  Run(const std::string& command, const ExperimentConfig& cfg)
      : command_(command), cfg_(cfg) {
    out_dir_ = cfg.get_path("paths.out_dir", "out");
    fs::create_directories(out_dir_);
  }

  const std::string& out_dir() const { return out_dir_; }
  std::string path(const std::string& name) const {
    return out_dir_ + "/" + name;
  }
  void declare(const std::string& p) { artifacts_.push_back(p); }

  void remove_artifacts() {
    for (const auto& p : artifacts_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

  std::string write_manifest() {
    json m;
    m["command"] = command_;
    m["config_hash"] = cfg_.hash();
    m["seed"] = cfg_.get_u64("seed");
    json ov = json::array();
    for (const auto& [k, v] : cfg_.overrides()) {
      json e;
      e["key"] = k;
      e["value"] = v;
      ov.push_back(std::move(e));
    }
    m["overrides"] = ov;
    m["config"] = json(cfg_.values());
    json arts = json::object();
    for (const auto& p : artifacts_) arts[p] = file_checksum(p);
    m["artifacts"] = arts;
    const std::string mp = path(command_ + ".manifest.json");
    std::ofstream out(mp);
    if (!out) throw std::runtime_error("cannot write " + mp);
    out << m.dump(2) << "\n";
    return mp;
  }

 private:
  std::string command_;
  const ExperimentConfig& cfg_;
  std::string out_dir_;
  std::vector<std::string> artifacts_;
};

std::uint64_t encoder_seed(const ExperimentConfig& cfg) {
  return Rng(cfg.get_u64("seed")).derive(0xE5C0DE).next_u64();
}

std::vector<Tweet> load_corpus_tweets(const ExperimentConfig& cfg) {
  auto tweets = load_tweets_jsonl(cfg.require_input_path("paths.tweets"));
  if (cfg.has("paths.labels")) {
    std::ifstream in(cfg.require_input_path("paths.labels"));
    std::unordered_map<std::string, Label> labels;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      labels[j.at("tweet_id").get<std::string>()] =
          label_from_name(j.at("label").get<std::string>());
    }
    for (auto& t : tweets) {
      auto it = labels.find(t.id);
      if (it != labels.end()) t.label = it->second;
    }
  }
  return tweets;
}

void require_valid_corpus(const std::vector<Tweet>& tweets,
                          const std::vector<UserProfile>& users,
                          const SchemaPair& schemas) {
  const auto report =
      validate_corpus(tweets, users, schemas.tweet, schemas.user);
  if (!report.valid())
    throw std::runtime_error(
        "corpus invalid: " + std::to_string(report.issues.size()) +
        " issue(s); run ingest for details (first: " +
        issue_kind_name(report.issues.front().kind) + " " +
        report.issues.front().id + ")");
}

DatasetSplit find_split(const std::vector<DatasetSplit>& splits,
                        SplitKind kind) {
  for (const auto& s : splits)
    if (s.kind == kind) return s;
  throw std::runtime_error("splits file has no " + split_kind_name(kind) +
                           " split");
}

std::vector<FollowEdge> load_follows(const ExperimentConfig& cfg) {
  if (!cfg.has("paths.follow_edges")) return {};
  return load_follow_edges_tsv(cfg.require_input_path("paths.follow_edges"));
}

SchemaPair load_schemas(const ExperimentConfig& cfg) {
  if (cfg.has("paths.feature_schema"))
    return load_schemas_json(cfg.require_input_path("paths.feature_schema"));
  return {default_tweet_schema(), default_user_schema()};
}

// ---- sage params file -------------------------------------------------

void save_sage(const SageParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::uint64_t n = p.layers.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const auto& layer : p.layers) {
    for (const Mat* m : {&layer.W_self, &layer.W_neigh}) {
      const std::uint64_t rows = static_cast<std::uint64_t>(m->rows());
      const std::uint64_t cols = static_cast<std::uint64_t>(m->cols());
      out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
      out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
      for (long r = 0; r < m->rows(); ++r)
        for (long c = 0; c < m->cols(); ++c) {
          const double v = (*m)(r, c);
          out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
  }
}

SageParams load_sage(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  SageParams p;
  p.layers.resize(n);
  for (auto& layer : p.layers) {
    for (Mat* m : {&layer.W_self, &layer.W_neigh}) {
      std::uint64_t rows = 0, cols = 0;
      in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
      in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
      m->resize(static_cast<long>(rows), static_cast<long>(cols));
      for (long r = 0; r < m->rows(); ++r)
        for (long c = 0; c < m->cols(); ++c) {
          double v = 0;
          in.read(reinterpret_cast<char*>(&v), sizeof(v));
          (*m)(r, c) = v;
        }
    }
  }
  if (!in) throw std::runtime_error("truncated sage params " + path);
  return p;
}

// ---- input assembly ----------------------------------------------------

struct CorpusBundle {
  std::vector<Tweet> tweets;
  std::vector<UserProfile> users;
  std::unordered_map<std::string, const Tweet*> tweet_by_id;
  std::unordered_map<std::string, const UserProfile*> user_by_id;
};

CorpusBundle load_bundle(const ExperimentConfig& cfg) {
  CorpusBundle b;
  b.tweets = load_corpus_tweets(cfg);
  b.users = load_users_jsonl(cfg.require_input_path("paths.users"));
  require_valid_corpus(b.tweets, b.users, load_schemas(cfg));
  for (const auto& t : b.tweets) b.tweet_by_id[t.id] = &t;
  for (const auto& u : b.users) b.user_by_id[u.id] = &u;
  return b;
}

Mat context_row(const Tweet& t, const UserProfile& u) {
  Mat row(1, static_cast<long>(t.tweet_features.size() +
                               u.user_features.size()));
  long j = 0;
  for (double v : t.tweet_features) row(0, j++) = v;
  for (double v : u.user_features) row(0, j++) = v;
  return row;
}

// Assembles model inputs for the given tweet ids. Context rows are raw;
// callers standardize with fitted or checkpointed statistics.
struct Assembly {
  std::map<std::string, ModelInput> inputs;  // ctx holds raw rows
};

Assembly assemble(const ExperimentConfig& cfg, const CorpusBundle& bundle,
                  const std::vector<std::string>& ids,
                  const Vocabulary& vocab, int n_tokens, int dim_k,
                  FetchMode evidence_mode, const Mat& graph_embeddings,
                  const std::unordered_map<std::string, long>& node_rows) {
  const auto encoder = make_default_encoder(dim_k, encoder_seed(cfg));
  SelectOptions select_opts;
  select_opts.epsilon = cfg.get_double("knowledge.epsilon");
  select_opts.similarity_sorted = cfg.get_bool("knowledge.similarity_sorted");

  std::unordered_map<std::string, EvidenceSet> preselected;
  EvidenceStore store;
  bool have_store = false;
  if (cfg.has("paths.evidence_sets")) {
    for (auto& s : load_evidence_sets_jsonl(
             cfg.require_input_path("paths.evidence_sets")))
      preselected[s.tweet_id] = std::move(s);
  } else if (cfg.has("paths.evidence_store")) {
    store =
        EvidenceStore::load_jsonl(cfg.require_input_path("paths.evidence_store"));
    have_store = true;
  }

  Assembly out;
  for (const auto& id : ids) {
    auto ti = bundle.tweet_by_id.find(id);
    if (ti == bundle.tweet_by_id.end())
      throw std::runtime_error("split references unknown tweet " + id);
    const Tweet& t = *ti->second;
    const UserProfile& u = *bundle.user_by_id.at(t.user_id);

    ModelInput in;
    in.tweet_id = id;
    in.label = t.label;
    in.token_ids = vocab.encode(t.text, n_tokens);
    auto pre = preselected.find(id);
    if (pre != preselected.end()) {
      in.evidence = pre->second.to_tensor(dim_k);
    } else if (have_store) {
      const auto docs = fetch_documents(t, store, evidence_mode);
      in.evidence =
          select_evidence(t, docs, *encoder, select_opts).to_tensor(dim_k);
    } else {
      in.evidence = Mat::Zero(kEvidenceCap, dim_k);
    }
    auto tr = node_rows.find(t.id);
    auto ur = node_rows.find(t.user_id);
    if (tr == node_rows.end())
      throw std::runtime_error("no graph embedding for tweet " + t.id);
    if (ur == node_rows.end())
      throw std::runtime_error("no graph embedding for user " + t.user_id);
    in.tg = graph_embeddings.row(tr->second);
    in.ug = graph_embeddings.row(ur->second);
    in.ctx = context_row(t, u);
    out.inputs.emplace(id, std::move(in));
  }
  return out;
}

std::pair<Mat, std::unordered_map<std::string, long>> load_graph_embeddings(
    const ExperimentConfig& cfg) {
  const std::string base = cfg.get_path("paths.out_dir", "out");
  const std::string bin =
      cfg.get_path("paths.embeddings_bin", base + "/embeddings.bin");
  const std::string ids =
      cfg.get_path("paths.embeddings_ids", base + "/embeddings.ids");
  if (!fs::exists(bin) || !fs::exists(ids))
    throw UsageError("graph embeddings not found (" + bin +
                     "); run embed-graph first");
  auto [m, id_list] = load_embeddings(bin, ids);
  std::unordered_map<std::string, long> rows;
  for (std::size_t i = 0; i < id_list.size(); ++i)
    rows[id_list[i]] = static_cast<long>(i);
  return {std::move(m), std::move(rows)};
}

std::vector<bool> combined_time_variant_flags(const SchemaPair& schemas) {
  std::vector<bool> flags;
  for (bool f : schemas.tweet.time_variant) flags.push_back(f);
  for (bool f : schemas.user.time_variant) flags.push_back(f);
  return flags;
}

// ---- commands ----------------------------------------------------------

RunResult cmd_ingest(Run& run, const ExperimentConfig& cfg) {
  const auto tweets = load_corpus_tweets(cfg);
  const auto users = load_users_jsonl(cfg.require_input_path("paths.users"));
  const auto schemas = load_schemas(cfg);
  const auto report =
      validate_corpus(tweets, users, schemas.tweet, schemas.user);
  json j;
  j["valid"] = report.valid();
  json issues = json::array();
  for (const auto& issue : report.issues) {
    json e;
    e["kind"] = issue_kind_name(issue.kind);
    e["id"] = issue.id;
    e["detail"] = issue.detail;
    issues.push_back(std::move(e));
  }
  j["issues"] = issues;
  j["tweets"] = tweets.size();
  j["users"] = users.size();
  const std::string p = run.path("validation_report.json");
  std::ofstream out(p);
  out << j.dump(2) << "\n";
  run.declare(p);
  RunResult r;
  r.exit_code = report.valid() ? kExitOk : kExitRuntime;
  r.message = report.valid()
                  ? "corpus valid (" + std::to_string(tweets.size()) +
                        " tweets, " + std::to_string(users.size()) + " users)"
                  : "corpus invalid: " + std::to_string(report.issues.size()) +
                        " issue(s), see " + p;
  return r;
}

RunResult cmd_weak_label(Run& run, const ExperimentConfig& cfg) {
  auto tweets = load_tweets_jsonl(cfg.require_input_path("paths.tweets"));
  const auto claims = load_claims_jsonl(cfg.require_input_path("paths.claims"));
  const double tau = cfg.get_double("splits.tau_label");
  const auto encoder =
      make_default_encoder(cfg.get_int("dims.K"), encoder_seed(cfg));

  const std::string labels_path = run.path("labels.jsonl");
  std::ofstream out(labels_path);
  if (!out) throw std::runtime_error("cannot write " + labels_path);
  std::size_t labelled = 0;
  for (auto& t : tweets) {
    t.label = weak_label(t, claims, *encoder, tau);
    if (t.label != Label::kUnlabelled) ++labelled;
    json j;
    j["tweet_id"] = t.id;
    j["label"] = label_name(t.label);
    out << j.dump() << "\n";
  }
  out.close();
  run.declare(labels_path);
  const std::string tweets_path = run.path("tweets_labelled.jsonl");
  save_tweets_jsonl(tweets, tweets_path);
  run.declare(tweets_path);
  RunResult r;
  r.message = "labelled " + std::to_string(labelled) + " of " +
              std::to_string(tweets.size()) + " tweets (tau " +
              std::to_string(tau) + ")";
  return r;
}

RunResult cmd_make_splits(Run& run, const ExperimentConfig& cfg) {
  const auto tweets = load_corpus_tweets(cfg);
  SplitConfig sc;
  sc.tau_cluster = cfg.get_double("splits.tau_cluster");
  sc.max_cluster_size = cfg.get_int("splits.max_cluster_size");
  sc.max_age_seconds = cfg.get_i64("splits.max_age_seconds");
  sc.general_test_fraction = cfg.get_double("splits.general_test_fraction");
  sc.seed = cfg.get_u64("seed");
  const auto encoder =
      make_default_encoder(cfg.get_int("dims.K"), encoder_seed(cfg));
  const auto splits = make_splits(tweets, *encoder, sc);
  const std::string p = run.path("splits.json");
  save_splits_json(splits, p);
  run.declare(p);
  std::ostringstream msg;
  for (const auto& s : splits)
    msg << split_kind_name(s.kind) << "=" << s.tweet_ids.size() << " ";
  RunResult r;
  r.message = "splits written: " + msg.str();
  return r;
}

RunResult cmd_build_graph(Run& run, const ExperimentConfig& cfg) {
  const auto bundle = load_bundle(cfg);
  const auto graph = build_graph(bundle.tweets, bundle.users,
                                 load_follows(cfg),
                                 cfg.get_bool("graph.include_label_tag"));
  const std::string p = run.path("edges.tsv");
  graph.save_edges_tsv(p);
  run.declare(p);
  RunResult r;
  r.message = "graph built: " + std::to_string(graph.node_count()) +
              " nodes, " + std::to_string(graph.edges().size()) + " edges";
  return r;
}

RunResult cmd_embed_graph(Run& run, const ExperimentConfig& cfg) {
  const auto bundle = load_bundle(cfg);
  const bool label_tag = cfg.get_bool("graph.include_label_tag");
  const auto graph =
      build_graph(bundle.tweets, bundle.users, load_follows(cfg), label_tag);
  const Mat feats = node_feature_matrix(graph, label_tag);

  const int g_dim = cfg.get_int("dims.G");
  std::vector<int> layer_dims(
      static_cast<std::size_t>(cfg.get_int("graph.layers")), g_dim);
  Rng init_rng(Rng(cfg.get_u64("seed")).derive(0x5A6E).next_u64());
  SageParams sage =
      init_sage(static_cast<int>(feats.cols()), layer_dims, init_rng);

  SageTrainConfig tc;
  tc.walk_length = cfg.get_int("graph.walk_length");
  tc.walks_per_node = cfg.get_int("graph.walks_per_node");
  tc.window = cfg.get_int("graph.window");
  tc.negatives = cfg.get_int("graph.negatives");
  tc.epochs = cfg.get_int("graph.epochs");
  tc.lr = cfg.get_double("graph.lr");
  tc.teleport = cfg.get_double("graph.teleport");
  tc.seed = Rng(cfg.get_u64("seed")).derive(0x3A6E).next_u64();
  const auto result = train_unsupervised(graph, feats, sage, tc);

  std::vector<int> all_nodes(static_cast<std::size_t>(graph.node_count()));
  for (int v = 0; v < graph.node_count(); ++v)
    all_nodes[static_cast<std::size_t>(v)] = v;
  const Mat emb = embed_nodes(graph, feats, sage, all_nodes);
  std::vector<std::string> ids;
  ids.reserve(all_nodes.size());
  for (int v : all_nodes) ids.push_back(graph.node(v).id);

  const std::string bin = run.path("embeddings.bin");
  const std::string idp = run.path("embeddings.ids");
  save_embeddings(emb, ids, bin, idp);
  run.declare(bin);
  run.declare(idp);
  const std::string sp = run.path("sage.bin");
  save_sage(sage, sp);
  run.declare(sp);
  RunResult r;
  r.message =
      "embedded " + std::to_string(graph.node_count()) + " nodes" +
      (result.epoch_losses.empty()
           ? ""
           : " (final loss " +
                 std::to_string(result.epoch_losses.back()) + ")");
  return r;
}

RunResult cmd_fetch_evidence(Run& run, const ExperimentConfig& cfg) {
  const auto tweets = load_corpus_tweets(cfg);
  const auto store =
      EvidenceStore::load_jsonl(cfg.require_input_path("paths.evidence_store"));
  const FetchMode mode = fetch_mode_from_name(cfg.get_str("knowledge.mode"));
  const auto encoder =
      make_default_encoder(cfg.get_int("dims.K"), encoder_seed(cfg));
  SelectOptions opts;
  opts.epsilon = cfg.get_double("knowledge.epsilon");
  opts.similarity_sorted = cfg.get_bool("knowledge.similarity_sorted");

  std::vector<EvidenceSet> sets;
  std::size_t total = 0;
  for (const auto& t : tweets) {
    auto set =
        select_evidence(t, fetch_documents(t, store, mode), *encoder, opts);
    total += set.selected.size();
    sets.push_back(std::move(set));
  }
  const std::string p = run.path("evidence_sets.jsonl");
  save_evidence_sets_jsonl(sets, p);
  run.declare(p);
  RunResult r;
  r.message = "selected " + std::to_string(total) + " sentences for " +
              std::to_string(tweets.size()) + " tweets (" +
              fetch_mode_name(mode) + ", epsilon " +
              cfg.get_str("knowledge.epsilon") + ")";
  return r;
}

RunResult cmd_train(Run& run, const ExperimentConfig& cfg) {
  const auto bundle = load_bundle(cfg);
  const auto splits =
      load_splits_json(cfg.require_input_path("paths.splits"));
  const auto train_split = find_split(splits, SplitKind::kTrain);

  // vocabulary from train-split texts
  std::vector<std::string> train_texts;
  std::set<std::string> train_ids(train_split.tweet_ids.begin(),
                                  train_split.tweet_ids.end());
  for (const auto& t : bundle.tweets)
    if (train_ids.count(t.id)) train_texts.push_back(t.text);
  const auto vocab = Vocabulary::build(
      train_texts, static_cast<std::size_t>(cfg.get_int("vocab.max_size")));
  const std::string vocab_path = run.path("vocab.txt");
  vocab.save(vocab_path);
  run.declare(vocab_path);

  auto [emb, node_rows] = load_graph_embeddings(cfg);

  ModelDims dims;
  dims.K = cfg.get_int("dims.K");
  dims.G = static_cast<int>(emb.cols());
  dims.C = cfg.get_int("dims.C");
  dims.k = cfg.get_int("dims.k");
  dims.N = cfg.get_int("dims.N");
  dims.E = cfg.get_int("dims.E");
  dims.V = static_cast<int>(vocab.size());
  const auto schemas = load_schemas(cfg);
  dims.n_tf = static_cast<int>(schemas.tweet.size());
  dims.n_uf = static_cast<int>(schemas.user.size());
  if (dims.G != cfg.get_int("dims.G"))
    std::cerr << "note: dims.G " << cfg.get_int("dims.G")
              << " overridden by embedding width " << dims.G << "\n";

  auto assembly =
      assemble(cfg, bundle, train_split.tweet_ids, vocab, dims.N, dims.K,
               FetchMode::kTrainTime, emb, node_rows);

  // standardizer from train rows
  std::vector<Mat> raw_rows;
  raw_rows.reserve(assembly.inputs.size());
  for (const auto& [id, in] : assembly.inputs) raw_rows.push_back(in.ctx);
  const auto standardizer =
      ContextStandardizer::fit(raw_rows, schemas.tweet, schemas.user);

  SageParams sage;
  const std::string sage_path =
      cfg.get_path("paths.sage", run.path("sage.bin"));
  if (fs::exists(sage_path)) sage = load_sage(sage_path);

  ModelParams params = init_model(dims, sage, cfg.get_double("fusion.p_drop"),
                                  cfg.get_u64("seed"));
  params.ctx_mean = standardizer.mean;
  params.ctx_stdev = standardizer.stdev;

  std::set<std::string> labelled_ids(train_split.labelled_ids.begin(),
                                     train_split.labelled_ids.end());
  std::vector<ModelInput> labelled, unlabelled;
  for (auto& [id, in] : assembly.inputs) {
    in.ctx = standardizer.standardize(in.ctx);
    if (labelled_ids.count(id) && in.label != Label::kUnlabelled)
      labelled.push_back(in);
    else
      unlabelled.push_back(in);
  }

  TrainConfig tc;
  tc.loss.lambda_ml = cfg.get_double("loss.lambda_ml");
  tc.loss.lambda_at = cfg.get_double("loss.lambda_at");
  tc.loss.lambda_vat = cfg.get_double("loss.lambda_vat");
  tc.loss.eps_at = cfg.get_double("loss.eps_at");
  tc.loss.eps_vat = cfg.get_double("loss.eps_vat");
  tc.loss.xi = cfg.get_double("loss.xi");
  tc.loss.power_iters = cfg.get_int("loss.power_iters");
  tc.epochs = cfg.get_int("train.epochs");
  tc.batch_size = cfg.get_int("train.batch_size");
  tc.lr = cfg.get_double("train.lr");
  tc.at_all_inputs = cfg.get_bool("train.at_all_inputs");
  tc.seed = cfg.get_u64("seed");
  tc.checkpoint_dir = cfg.get_path("paths.checkpoint_dir",
                                   run.path("checkpoints"));
  tc.config_hash = cfg.hash();

  const auto result = train(params, labelled, unlabelled, tc);
  for (const auto& e :
       fs::directory_iterator(tc.checkpoint_dir))
    if (e.path().extension() == ".ckpt") run.declare(e.path().string());
  const std::string log_path = run.path("training_log.csv");
  write_training_log_csv(result.log, log_path);
  run.declare(log_path);

  RunResult r;
  if (result.aborted) {
    r.exit_code = kExitRuntime;
    r.message = "training aborted: " + result.abort_reason;
  } else {
    std::ostringstream msg;
    msg << "trained " << tc.epochs << " epochs on " << labelled.size()
        << " labelled + " << unlabelled.size() << " unlabelled";
    if (!result.log.empty())
      msg << "; final total loss " << result.log.back().total
          << ", train acc " << result.log.back().train_acc;
    r.message = msg.str();
  }
  return r;
}

RunResult cmd_eval(Run& run, const ExperimentConfig& cfg) {
  const std::string ckpt_path = cfg.get_path(
      "paths.checkpoint", run.path("checkpoints") + "/final.ckpt");
  if (!fs::exists(ckpt_path))
    throw UsageError("checkpoint not found: " + ckpt_path);
  const ModelParams params = load_checkpoint(ckpt_path);

  const auto bundle = load_bundle(cfg);
  const auto splits =
      load_splits_json(cfg.require_input_path("paths.splits"));
  const SplitKind kind = split_kind_from_name(cfg.get_str("eval.split"));
  const auto split = find_split(splits, kind);
  if (split.tweet_ids.empty()) throw std::runtime_error("split is empty");

  const std::string vocab_path =
      cfg.get_path("paths.vocab", run.path("vocab.txt"));
  if (!fs::exists(vocab_path))
    throw UsageError("vocabulary not found: " + vocab_path);
  const auto vocab = Vocabulary::load(vocab_path);
  if (static_cast<int>(vocab.size()) != params.dims.V)
    throw std::runtime_error("vocabulary size " +
                             std::to_string(vocab.size()) +
                             " != checkpoint V " +
                             std::to_string(params.dims.V));

  auto [emb, node_rows] = load_graph_embeddings(cfg);
  // early-test simulates scarce early evidence
  const FetchMode mode = kind == SplitKind::kEarlyTest
                             ? FetchMode::kTrainTime
                             : FetchMode::kTestTime;
  auto assembly = assemble(cfg, bundle, split.tweet_ids, vocab,
                           params.dims.N, params.dims.K, mode, emb,
                           node_rows);

  EvalDataset data;
  data.time_variant = combined_time_variant_flags(load_schemas(cfg));
  ContextStandardizer st;
  st.mean = params.ctx_mean;
  st.stdev = params.ctx_stdev;
  for (auto& [id, in] : assembly.inputs) {
    in.ctx = st.standardize(in.ctx);
    data.inputs.emplace(id, std::move(in));
  }

  const EvalMode emode = cfg.get_bool("eval.mask_detect")
                             ? EvalMode::kMaskDetect
                             : EvalMode::kPlain;
  MetricsReport m = evaluate(params, data, split, emode);
  m.run_name = cfg.get_str("eval.run_name", "endemic");

  const std::string p =
      run.path("metrics_" + m.split + "_" + m.mode + ".json");
  save_metrics_json(m, p);
  run.declare(p);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%s/%s: acc %.3f prec %.3f rec %.3f f1 %.3f (excluded %ld)",
                m.split.c_str(), m.mode.c_str(), m.accuracy, m.precision,
                m.recall, m.f1, m.excluded_unlabelled);
  RunResult r;
  r.message = buf;
  return r;
}

RunResult cmd_report(Run& run, const ExperimentConfig& cfg) {
  std::vector<std::string> files;
  if (cfg.has("report.compare_a") || cfg.has("report.compare_b")) {
    files.push_back(cfg.require_input_path("report.compare_a"));
    files.push_back(cfg.require_input_path("report.compare_b"));
  } else if (cfg.has("report.runs")) {
    std::istringstream ss(cfg.get_str("report.runs"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      if (!fs::exists(item)) throw UsageError("missing metrics file " + item);
      files.push_back(item);
    }
  } else {
    // default: all metrics_*.json under out_dir, sorted
    for (const auto& e : fs::directory_iterator(run.out_dir())) {
      const auto name = e.path().filename().string();
      if (name.rfind("metrics_", 0) == 0 && e.path().extension() == ".json")
        files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw UsageError("report: no metrics files given");
  std::vector<MetricsReport> runs;
  for (const auto& f : files) runs.push_back(load_metrics_json(f));
  const auto art = report(std::move(runs), run.out_dir());
  run.declare(art.csv_path);
  run.declare(art.txt_path);
  for (const auto& p : art.plot_paths) run.declare(p);
  RunResult r;
  r.message = "report written to " + art.csv_path + " (" +
              std::to_string(files.size()) + " runs)";
  return r;
}

}  // namespace

RunResult run_command(const std::string& command,
                      const ExperimentConfig& cfg) {
  RunResult result;
  try {
    cfg.validate();
    Run run(command, cfg);
    try {
      if (command == "ingest") result = cmd_ingest(run, cfg);
      else if (command == "weak-label") result = cmd_weak_label(run, cfg);
      else if (command == "make-splits") result = cmd_make_splits(run, cfg);
      else if (command == "build-graph") result = cmd_build_graph(run, cfg);
      else if (command == "embed-graph") result = cmd_embed_graph(run, cfg);
      else if (command == "fetch-evidence")
        result = cmd_fetch_evidence(run, cfg);
      else if (command == "train") result = cmd_train(run, cfg);
      else if (command == "eval") result = cmd_eval(run, cfg);
      else if (command == "report") result = cmd_report(run, cfg);
      else throw UsageError("unknown command: " + command);
    } catch (...) {
      run.remove_artifacts();
      throw;
    }
    result.manifest_path = run.write_manifest();
  } catch (const UsageError& e) {
    result.exit_code = kExitUsage;
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitRuntime;
    result.message = e.what();
  }
  return result;
}

}  // namespace endemic
