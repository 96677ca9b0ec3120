#include "endemic/textenc.hpp"

#include <stdexcept>

namespace endemic {

namespace {

Mat uniform_fan_in(long rows, long cols, long fan_in, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Mat m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = rng.uniform(-s, s);
  return m;
}

}  // namespace

BiLstmParams init_bilstm(int vocab_size, int embed_dim, int output_dim,
                         Rng& rng) {
  if (output_dim % 2 != 0)
    throw std::invalid_argument("output_dim (K) must be even");
  const int h = output_dim / 2;
  BiLstmParams p;
  p.embedding = uniform_fan_in(vocab_size, embed_dim, embed_dim, rng);
  for (LstmCellParams* cell : {&p.fwd, &p.bwd}) {
    cell->W = uniform_fan_in(4 * h, embed_dim, embed_dim, rng);
    cell->U = uniform_fan_in(4 * h, h, h, rng);
    cell->b = Mat::Zero(4 * h, 1);
  }
  return p;
}

ad::Var embed_tokens(ad::Binder& binder, const BiLstmParams& params,
                     const std::vector<int>& token_ids) {
  return ad::gather_rows(binder(params.embedding), token_ids);
}

ad::Var lstm_direction(ad::Binder& binder, const LstmCellParams& cell,
                       const ad::Var& embedded, bool reversed) {
  const int n = static_cast<int>(embedded.rows());
  const int h = cell.hidden();
  ad::Tape& tape = binder.tape();

  const ad::Var W = binder(cell.W);
  const ad::Var U = binder(cell.U);
  const ad::Var b = binder(cell.b);

  ad::Var hs = tape.leaf(Mat::Zero(h, 1));
  ad::Var cs = tape.leaf(Mat::Zero(h, 1));
  std::vector<ad::Var> rows(static_cast<std::size_t>(n));
  for (int step = 0; step < n; ++step) {
    const int t = reversed ? n - 1 - step : step;
    const ad::Var x_t = ad::transpose(ad::block(embedded, t, 0, 1,
                                                static_cast<int>(embedded.cols())));
    const ad::Var z =
        ad::add(ad::add(ad::matmul(W, x_t), ad::matmul(U, hs)), b);
    const ad::Var i_g = ad::sigmoid(ad::block(z, 0, 0, h, 1));
    const ad::Var f_g = ad::sigmoid(ad::block(z, h, 0, h, 1));
    const ad::Var g_g = ad::tanh(ad::block(z, 2 * h, 0, h, 1));
    const ad::Var o_g = ad::sigmoid(ad::block(z, 3 * h, 0, h, 1));
    cs = ad::add(ad::mul(f_g, cs), ad::mul(i_g, g_g));
    hs = ad::mul(o_g, ad::tanh(cs));
    rows[static_cast<std::size_t>(t)] = ad::transpose(hs);
  }
  return ad::vconcat(rows);
}

ad::Var encode_embedded(ad::Binder& binder, const BiLstmParams& params,
                        const ad::Var& embedded) {
  if (embedded.cols() != params.embed_dim())
    throw std::invalid_argument("encode_embedded: embedded cols " +
                                std::to_string(embedded.cols()) +
                                " != embed dim " +
                                std::to_string(params.embed_dim()));
  const ad::Var f = lstm_direction(binder, params.fwd, embedded, false);
  const ad::Var r = lstm_direction(binder, params.bwd, embedded, true);
  return ad::hconcat({f, r});
}

Mat encode_text(const std::string& text, const Vocabulary& vocab,
                const BiLstmParams& params, int n) {
  if (n < 1) throw std::invalid_argument("sequence length must be >= 1");
  ad::Tape tape;
  ad::Binder binder(tape, false);
  const auto ids = vocab.encode(text, n);
  const ad::Var emb = embed_tokens(binder, params, ids);
  return encode_embedded(binder, params, emb).value();
}

}  // namespace endemic
