#include "endemic/model.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace endemic {

using nlohmann::json;

ModelParams init_model(const ModelDims& dims, const SageParams& sage,
                       double p_drop, std::uint64_t seed) {
  if (dims.K % 2 != 0) throw std::invalid_argument("K must be even");
  if (dims.V < 2) throw std::invalid_argument("vocabulary not set");
  ModelParams p;
  p.dims = dims;
  p.seed = seed;
  Rng rng(seed);
  Rng r_text = rng.derive(1);
  Rng r_co1 = rng.derive(2);
  Rng r_co2 = rng.derive(3);
  Rng r_fuse = rng.derive(4);
  p.textenc = init_bilstm(dims.V, dims.E, dims.K, r_text);
  p.co_ek_tt = init_coattention(dims.K, dims.k, r_co1);
  p.co_tg_ug = init_coattention(dims.G, dims.k, r_co2);
  p.fusion = init_fusion(dims.n_tf + dims.n_uf, dims.C, dims.head_in(),
                         p_drop, r_fuse);
  p.sage = sage;
  p.ctx_mean = Mat::Zero(1, dims.n_tf + dims.n_uf);
  p.ctx_stdev = Mat::Ones(1, dims.n_tf + dims.n_uf);
  return p;
}

std::vector<NamedMat> param_registry(ModelParams& p) {
  std::vector<NamedMat> reg;
  reg.push_back({"textenc.embedding", &p.textenc.embedding, true});
  reg.push_back({"textenc.fwd.W", &p.textenc.fwd.W, true});
  reg.push_back({"textenc.fwd.U", &p.textenc.fwd.U, true});
  reg.push_back({"textenc.fwd.b", &p.textenc.fwd.b, true});
  reg.push_back({"textenc.bwd.W", &p.textenc.bwd.W, true});
  reg.push_back({"textenc.bwd.U", &p.textenc.bwd.U, true});
  reg.push_back({"textenc.bwd.b", &p.textenc.bwd.b, true});
  int i = 0;
  for (CoAttentionParams* co : {&p.co_ek_tt, &p.co_tg_ug}) {
    const std::string prefix =
        i++ == 0 ? "coattn.ek_tt." : "coattn.tg_ug.";
    reg.push_back({prefix + "W_b", &co->W_b, true});
    reg.push_back({prefix + "W_A", &co->W_A, true});
    reg.push_back({prefix + "W_B", &co->W_B, true});
    reg.push_back({prefix + "w_hA", &co->w_hA, true});
    reg.push_back({prefix + "w_hB", &co->w_hB, true});
  }
  reg.push_back({"fusion.ffn_W", &p.fusion.ffn_W, true});
  reg.push_back({"fusion.ffn_b", &p.fusion.ffn_b, true});
  reg.push_back({"fusion.head_W", &p.fusion.head_W, true});
  reg.push_back({"fusion.head_b", &p.fusion.head_b, true});
  for (std::size_t l = 0; l < p.sage.layers.size(); ++l) {
    const std::string prefix = "hetgraph.sage." + std::to_string(l) + ".";
    reg.push_back({prefix + "W_self", &p.sage.layers[l].W_self, false});
    reg.push_back({prefix + "W_neigh", &p.sage.layers[l].W_neigh, false});
  }
  reg.push_back({"context.mean", &p.ctx_mean, false});
  reg.push_back({"context.stdev", &p.ctx_stdev, false});
  return reg;
}

namespace {
constexpr char kMagic[9] = "ENDMCKPT";
}

void save_checkpoint(const ModelParams& params, const std::string& path,
                     const std::string& config_hash) {
  auto& p = const_cast<ModelParams&>(params);
  const auto reg = param_registry(p);

  json manifest;
  manifest["version"] = 1;
  manifest["seed"] = params.seed;
  manifest["config_hash"] = config_hash;
  manifest["p_drop"] = params.fusion.p_drop;
  manifest["sage_layers"] = params.sage.layers.size();
  json dims;
  dims["K"] = params.dims.K;
  dims["G"] = params.dims.G;
  dims["C"] = params.dims.C;
  dims["k"] = params.dims.k;
  dims["N"] = params.dims.N;
  dims["E"] = params.dims.E;
  dims["V"] = params.dims.V;
  dims["n_tf"] = params.dims.n_tf;
  dims["n_uf"] = params.dims.n_uf;
  manifest["dims"] = dims;
  json segments = json::array();
  for (const auto& nm : reg) {
    json s;
    s["name"] = nm.name;
    s["rows"] = nm.mat->rows();
    s["cols"] = nm.mat->cols();
    s["trainable"] = nm.trainable;
    segments.push_back(std::move(s));
  }
  manifest["segments"] = segments;
  const std::string mtxt = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, 8);
  const std::uint64_t mlen = mtxt.size();
  out.write(reinterpret_cast<const char*>(&mlen), sizeof(mlen));
  out.write(mtxt.data(), static_cast<std::streamsize>(mtxt.size()));
  for (const auto& nm : reg) {
    for (long r = 0; r < nm.mat->rows(); ++r)
      for (long c = 0; c < nm.mat->cols(); ++c) {
        const double v = (*nm.mat)(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
  }
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(kMagic, 8))
    throw std::runtime_error(path + ": not a checkpoint file");
  std::uint64_t mlen = 0;
  in.read(reinterpret_cast<char*>(&mlen), sizeof(mlen));
  std::string mtxt(mlen, '\0');
  in.read(mtxt.data(), static_cast<std::streamsize>(mlen));
  const json manifest = json::parse(mtxt);

  ModelParams p;
  const auto& d = manifest.at("dims");
  p.dims.K = d.at("K");
  p.dims.G = d.at("G");
  p.dims.C = d.at("C");
  p.dims.k = d.at("k");
  p.dims.N = d.at("N");
  p.dims.E = d.at("E");
  p.dims.V = d.at("V");
  p.dims.n_tf = d.at("n_tf");
  p.dims.n_uf = d.at("n_uf");
  p.seed = manifest.at("seed");
  p.fusion.p_drop = manifest.at("p_drop");
  p.sage.layers.resize(manifest.at("sage_layers").get<std::size_t>());

  // allocate by segment table, then read in order
  auto reg = param_registry(p);
  const auto& segments = manifest.at("segments");
  if (segments.size() != reg.size())
    throw std::runtime_error(path + ": segment table mismatch");
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const auto& s = segments[i];
    if (s.at("name").get<std::string>() != reg[i].name)
      throw std::runtime_error(path + ": unexpected segment " +
                               s.at("name").get<std::string>());
    reg[i].mat->resize(s.at("rows").get<long>(), s.at("cols").get<long>());
  }
  for (auto& nm : reg) {
    for (long r = 0; r < nm.mat->rows(); ++r)
      for (long c = 0; c < nm.mat->cols(); ++c) {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        (*nm.mat)(r, c) = v;
      }
  }
  if (!in) throw std::runtime_error(path + ": truncated checkpoint");
  return p;
}

ModelOutputVars model_forward(ad::Binder& binder, const ModelParams& params,
                              const ModelInput& input, ForwardMode mode,
                              Rng* dropout_rng,
                              const InputPerturbations& pert) {
  ad::Tape& tape = binder.tape();
  auto perturbed = [&](ad::Var base, const ad::Var& delta) {
    return delta.valid() ? ad::add(base, delta) : base;
  };

  ad::Var embedded = perturbed(
      embed_tokens(binder, params.textenc, input.token_ids), pert.embedded);

  const ad::Var d_tt = encode_embedded(binder, params.textenc, embedded);
  const ad::Var d_ek = perturbed(tape.leaf(input.evidence), pert.evidence);
  const auto co_text = coattend(binder, params.co_ek_tt, d_ek, d_tt);

  const ad::Var d_tg = perturbed(tape.leaf(input.tg), pert.tg);
  const ad::Var d_ug = perturbed(tape.leaf(input.ug), pert.ug);
  const auto co_graph = coattend(binder, params.co_tg_ug, d_tg, d_ug);

  const ad::Var d_tu = encode_context(
      binder, params.fusion, perturbed(tape.leaf(input.ctx), pert.ctx));

  ModelOutputVars out;
  out.embedded = embedded;
  out.probs = classify(binder, params.fusion, co_text.A_hat, co_text.B_hat,
                       co_graph.A_hat, co_graph.B_hat, d_tu, mode,
                       dropout_rng);
  return out;
}

Eigen::Vector2d predict(const ModelParams& params, const ModelInput& input) {
  ad::Tape tape;
  ad::Binder binder(tape, false);
  const auto out =
      model_forward(binder, params, input, ForwardMode::kEval, nullptr);
  return Eigen::Vector2d(out.probs.value()(0, 0), out.probs.value()(0, 1));
}

}  // namespace endemic
