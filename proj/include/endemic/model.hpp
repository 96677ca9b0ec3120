#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "endemic/coattn.hpp"
#include "endemic/fusion.hpp"
#include "endemic/hetgraph.hpp"
#include "endemic/textenc.hpp"

namespace endemic {

struct ModelDims {
  int K = 512;   // sentence / text encoding dim
  int G = 768;   // graph embedding dim
  int C = 128;   // contextual FFN output dim
  int k = 256;   // co-attention hidden dim
  int N = 64;    // token sequence length
  int E = 300;   // word embedding dim
  int V = 0;     // vocabulary size (set after vocab build)
  int n_tf = 4;
  int n_uf = 4;
  int head_in() const { return 2 * K + 2 * G + C; }
};

// Every learnable block plus the frozen segments carried for inference.
struct ModelParams {
  ModelDims dims;
  BiLstmParams textenc;
  CoAttentionParams co_ek_tt;  // Z = K
  CoAttentionParams co_tg_ug;  // Z = G
  FusionParams fusion;
  SageParams sage;          // pretrained, frozen during classifier training
  Mat ctx_mean, ctx_stdev;  // standardizer statistics (non-trainable)
  std::uint64_t seed = 0;
};

ModelParams init_model(const ModelDims& dims, const SageParams& sage,
                       double p_drop, std::uint64_t seed);

struct NamedMat {
  std::string name;
  Mat* mat;
  bool trainable;
};

// Stable enumeration used by the optimizer, finite-difference tests and the
// checkpoint writer.
std::vector<NamedMat> param_registry(ModelParams& params);

// Checkpoint file: magic + version, JSON manifest (dims, seed, segment
// table), then raw little-endian doubles per segment. Writing is
// deterministic, so equal params give byte-identical files.
void save_checkpoint(const ModelParams& params, const std::string& path,
                     const std::string& config_hash = "");
ModelParams load_checkpoint(const std::string& path);

// Per-tweet assembled input to the unified model.
struct ModelInput {
  std::string tweet_id;
  std::vector<int> token_ids;  // length N
  Mat evidence;                // kEvidenceCap x K, zero-padded
  Mat tg;                      // 1 x G
  Mat ug;                      // 1 x G
  Mat ctx;                     // 1 x (n_tf + n_uf), standardized
  Label label = Label::kUnlabelled;
};

struct ModelOutputVars {
  ad::Var probs;     // 1 x 2, classes [fake, genuine]
  ad::Var embedded;  // N x E word embeddings used by the pass
};

// Additive perturbations for adversarial passes; absent members leave the
// corresponding input untouched. The default AT/VAT path perturbs only the
// word embeddings.
struct InputPerturbations {
  ad::Var embedded;  // N x E
  ad::Var evidence;  // kEvidenceCap x K
  ad::Var tg;        // 1 x G
  ad::Var ug;        // 1 x G
  ad::Var ctx;       // 1 x (n_tf + n_uf)
};

// Full pipeline for one input.
ModelOutputVars model_forward(ad::Binder& binder, const ModelParams& params,
                              const ModelInput& input, ForwardMode mode,
                              Rng* dropout_rng,
                              const InputPerturbations& pert = {});

// Forward-only probability pair [p_fake, p_genuine].
Eigen::Vector2d predict(const ModelParams& params, const ModelInput& input);

inline int label_index(Label l) { return l == Label::kFake ? 0 : 1; }

}  // namespace endemic
