#include "endemic/textenc.hpp"

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace endemic;

namespace {

Vocabulary toy_vocab() {
  return Vocabulary::build({"covid vaccine works fine",
                            "masks help against covid",
                            "bleach does not cure covid"},
                           64);
}

}  // namespace

TEST_CASE("tokenizer lowercases and normalizes urls and mentions") {
  const auto toks =
      tokenize("Check THIS https://example.com/x @dr_smith #Covid-19!");
  REQUIRE(toks.size() == 6);
  CHECK(toks[0] == "check");
  CHECK(toks[1] == "this");
  CHECK(toks[2] == "<url>");
  CHECK(toks[3] == "<mention>");
  CHECK(toks[4] == "covid");
  CHECK(toks[5] == "19");
}

TEST_CASE("vocabulary is dense with PAD at 0 and round-trips via file") {
  const auto v = toy_vocab();
  CHECK(v.index_of("<pad>") == Vocabulary::kPad);
  CHECK(v.index_of("<unk>") == Vocabulary::kUnk);
  CHECK(v.index_of("covid") >= 2);
  CHECK(v.index_of("neverseen") == Vocabulary::kUnk);

  const std::string path = "vocab_test.txt";
  v.save(path);
  const auto v2 = Vocabulary::load(path);
  CHECK(v2.size() == v.size());
  CHECK(v2.index_of("covid") == v.index_of("covid"));
  std::filesystem::remove(path);
}

TEST_CASE("encode pads and truncates to exactly N") {
  const auto v = toy_vocab();
  const auto short_ids = v.encode("covid", 6);
  REQUIRE(short_ids.size() == 6);
  CHECK(short_ids[0] == v.index_of("covid"));
  for (int i = 1; i < 6; ++i) CHECK(short_ids[i] == Vocabulary::kPad);
  const auto long_ids = v.encode("covid vaccine works fine masks help", 3);
  CHECK(long_ids.size() == 3);
}

TEST_CASE("empty text encodes to N PAD rows with recurrence-driven states") {
  Rng rng(4);
  auto params = init_bilstm(10, 3, 4, rng);
  const auto v = toy_vocab();
  const Mat out = encode_text("", v, params, 5);
  CHECK(out.rows() == 5);
  CHECK(out.cols() == 4);
  CHECK(out.allFinite());

  // oracle: run the forward cell by hand over 5 copies of the PAD embedding
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  const Eigen::VectorXd x = params.embedding.row(Vocabulary::kPad);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd z =
        params.fwd.W * x + params.fwd.U * h + params.fwd.b;
    for (int j = 0; j < 2; ++j) {
      const double i_g = sigmoid(z[j]);
      const double f_g = sigmoid(z[2 + j]);
      const double g_g = std::tanh(z[4 + j]);
      const double o_g = sigmoid(z[6 + j]);
      c[j] = f_g * c[j] + i_g * g_g;
      h[j] = o_g * std::tanh(c[j]);
    }
    for (int j = 0; j < 2; ++j)
      CHECK(out(t, j) == doctest::Approx(h[j]).epsilon(1e-12));
  }
}

TEST_CASE("output width is K with per-direction width K/2") {
  Rng rng(4);
  const int K = 8;
  auto params = init_bilstm(20, 5, K, rng);
  CHECK(params.fwd.hidden() == K / 2);
  const auto v = toy_vocab();
  const Mat out = encode_text("covid vaccine", v, params, 7);
  CHECK(out.rows() == 7);
  CHECK(out.cols() == K);
}

TEST_CASE("scalar LSTM matches hand-computed gate equations both ways") {
  // 1 token, hidden size 1: every gate is a scalar sigmoid/tanh expression
  BiLstmParams p;
  p.embedding = Mat::Zero(3, 1);
  p.embedding(2, 0) = 0.7;  // token "x" embeds to 0.7
  for (LstmCellParams* cell : {&p.fwd, &p.bwd}) {
    cell->W = Mat(4, 1);
    cell->U = Mat(4, 1);
    cell->b = Mat(4, 1);
  }
  p.fwd.W << 0.5, -0.3, 0.8, 0.2;
  p.fwd.U << 0.1, 0.4, -0.2, 0.3;
  p.fwd.b << 0.05, -0.05, 0.1, 0.0;
  p.bwd.W << -0.6, 0.25, 0.45, -0.15;
  p.bwd.U << 0.2, -0.1, 0.05, 0.6;
  p.bwd.b << 0.0, 0.02, -0.03, 0.04;

  ad::Tape tape;
  ad::Binder binder(tape, false);
  const auto emb = gather_rows(binder(p.embedding), {2});
  const Mat out = encode_embedded(binder, p, emb).value();
  REQUIRE(out.rows() == 1);
  REQUIRE(out.cols() == 2);

  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  auto cell_out = [&](const LstmCellParams& c) {
    const double x = 0.7, h0 = 0.0, c0 = 0.0;
    const double i = sigmoid(c.W(0, 0) * x + c.U(0, 0) * h0 + c.b(0, 0));
    const double f = sigmoid(c.W(1, 0) * x + c.U(1, 0) * h0 + c.b(1, 0));
    const double g = std::tanh(c.W(2, 0) * x + c.U(2, 0) * h0 + c.b(2, 0));
    const double o = sigmoid(c.W(3, 0) * x + c.U(3, 0) * h0 + c.b(3, 0));
    const double cc = f * c0 + i * g;
    return o * std::tanh(cc);
  };
  CHECK(out(0, 0) == doctest::Approx(cell_out(p.fwd)).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(cell_out(p.bwd)).epsilon(1e-12));
}

TEST_CASE("direction decomposition: halves equal independent one-way passes") {
  Rng rng(31);
  auto params = init_bilstm(30, 4, 6, rng);
  const auto v = toy_vocab();
  const auto ids = v.encode("masks help against covid", 5);

  ad::Tape tape;
  ad::Binder binder(tape, false);
  const auto emb = embed_tokens(binder, params, ids);
  const Mat full = encode_embedded(binder, params, emb).value();
  const Mat fwd = lstm_direction(binder, params.fwd, emb, false).value();
  const Mat bwd = lstm_direction(binder, params.bwd, emb, true).value();
  CHECK(full.leftCols(3).isApprox(fwd, 1e-12));
  CHECK(full.rightCols(3).isApprox(bwd, 1e-12));
}

TEST_CASE("encoder gradients w.r.t. embedding table match finite differences") {
  Rng rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    auto params = init_bilstm(12, 3, 4, rng);
    const std::vector<int> ids = {2, 5, 7, 2};

    Mat weight = testing::random_mat(4, 4, rng);  // N x K weighting

    auto loss_value = [&]() {
      ad::Tape tape;
      ad::Binder binder(tape, false);
      const auto emb = embed_tokens(binder, params, ids);
      const auto enc = encode_embedded(binder, params, emb);
      return ad::sum(ad::mul(enc, tape.leaf(weight))).value()(0, 0);
    };

    ad::Tape tape;
    ad::Binder binder(tape, true);
    const auto emb = embed_tokens(binder, params, ids);
    const auto enc = encode_embedded(binder, params, emb);
    const auto loss = ad::sum(ad::mul(enc, tape.leaf(weight)));
    tape.backward(loss);

    const auto result = testing::gradcheck(
        loss_value,
        {{"embedding", &params.embedding},
         {"fwd.W", &params.fwd.W},
         {"bwd.U", &params.bwd.U},
         {"fwd.b", &params.fwd.b}},
        {binder.grad_of(params.embedding), binder.grad_of(params.fwd.W),
         binder.grad_of(params.bwd.U), binder.grad_of(params.fwd.b)});
    CHECK_MESSAGE(result.pass(1e-3), result.worst, " rel err ",
                  result.max_rel_err);
  }
}
