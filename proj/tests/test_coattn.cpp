#include "endemic/coattn.hpp"

#include <cmath>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

using namespace endemic;

namespace {

// Independent scalar-loop reimplementation of the whole block.
struct ScalarCoAttn {
  Mat affinity, H_A, H_B, a_A, a_B, A_hat, B_hat;
};

ScalarCoAttn scalar_coattend(const CoAttentionParams& p, const Mat& dA,
                             const Mat& dB) {
  const long X = dA.rows(), Y = dB.rows(), Z = dA.cols();
  const long k = p.W_A.rows();
  ScalarCoAttn o;
  // M[x][y] = sum_{i,j} dA[x][i] W_b[i][j] dB[y][j]; affinity = tanh(M)^T
  o.affinity = Mat::Zero(Y, X);
  for (long x = 0; x < X; ++x)
    for (long y = 0; y < Y; ++y) {
      double acc = 0;
      for (long i = 0; i < Z; ++i)
        for (long j = 0; j < Z; ++j)
          acc += dA(x, i) * p.W_b(i, j) * dB(y, j);
      o.affinity(y, x) = std::tanh(acc);
    }
  // H_A[r][x] = tanh(sum_z W_A[r][z] dA[x][z] + sum_y (W_B dB^T)[r][y] C[y][x])
  o.H_A = Mat::Zero(k, X);
  o.H_B = Mat::Zero(k, Y);
  for (long r = 0; r < k; ++r) {
    for (long x = 0; x < X; ++x) {
      double acc = 0;
      for (long z = 0; z < Z; ++z) acc += p.W_A(r, z) * dA(x, z);
      for (long y = 0; y < Y; ++y) {
        double proj = 0;
        for (long z = 0; z < Z; ++z) proj += p.W_B(r, z) * dB(y, z);
        acc += proj * o.affinity(y, x);
      }
      o.H_A(r, x) = std::tanh(acc);
    }
    for (long y = 0; y < Y; ++y) {
      double acc = 0;
      for (long z = 0; z < Z; ++z) acc += p.W_B(r, z) * dB(y, z);
      for (long x = 0; x < X; ++x) {
        double proj = 0;
        for (long z = 0; z < Z; ++z) proj += p.W_A(r, z) * dA(x, z);
        acc += proj * o.affinity(y, x);
      }
      o.H_B(r, y) = std::tanh(acc);
    }
  }
  auto softmax = [](const std::vector<double>& v) {
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    double sum = 0;
    std::vector<double> e(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      e[i] = std::exp(v[i] - mx);
      sum += e[i];
    }
    for (auto& x : e) x /= sum;
    return e;
  };
  std::vector<double> logits_a(static_cast<std::size_t>(X), 0.0);
  for (long x = 0; x < X; ++x)
    for (long r = 0; r < k; ++r)
      logits_a[static_cast<std::size_t>(x)] += p.w_hA(r, 0) * o.H_A(r, x);
  std::vector<double> logits_b(static_cast<std::size_t>(Y), 0.0);
  for (long y = 0; y < Y; ++y)
    for (long r = 0; r < k; ++r)
      logits_b[static_cast<std::size_t>(y)] += p.w_hB(r, 0) * o.H_B(r, y);
  const auto aa = softmax(logits_a);
  const auto ab = softmax(logits_b);
  o.a_A = Mat::Zero(1, X);
  o.a_B = Mat::Zero(1, Y);
  for (long x = 0; x < X; ++x) o.a_A(0, x) = aa[static_cast<std::size_t>(x)];
  for (long y = 0; y < Y; ++y) o.a_B(0, y) = ab[static_cast<std::size_t>(y)];
  o.A_hat = Mat::Zero(1, Z);
  o.B_hat = Mat::Zero(1, Z);
  for (long z = 0; z < Z; ++z) {
    for (long x = 0; x < X; ++x) o.A_hat(0, z) += o.a_A(0, x) * dA(x, z);
    for (long y = 0; y < Y; ++y) o.B_hat(0, z) += o.a_B(0, y) * dB(y, z);
  }
  return o;
}

}  // namespace

TEST_CASE("single-row inputs collapse to the identity weighting") {
  Rng rng(1);
  const auto p = init_coattention(4, 3, rng);
  const Mat dA = testing::random_mat(1, 4, rng);
  const Mat dB = testing::random_mat(1, 4, rng);
  const auto out = coattend_plain(p, dA, dB);
  CHECK(out.a_A(0, 0) == doctest::Approx(1.0));
  CHECK(out.a_B(0, 0) == doctest::Approx(1.0));
  CHECK(out.A_hat.isApprox(dA, 1e-12));
  CHECK(out.B_hat.isApprox(dB, 1e-12));
}

TEST_CASE("zero parameters give uniform attention and column means") {
  Rng rng(2);
  CoAttentionParams p;
  p.W_b = Mat::Zero(4, 4);
  p.W_A = Mat::Zero(3, 4);
  p.W_B = Mat::Zero(3, 4);
  p.w_hA = Mat::Zero(3, 1);
  p.w_hB = Mat::Zero(3, 1);
  const Mat dA = testing::random_mat(5, 4, rng);
  const Mat dB = testing::random_mat(2, 4, rng);
  const auto out = coattend_plain(p, dA, dB);
  for (long x = 0; x < 5; ++x)
    CHECK(out.a_A(0, x) == doctest::Approx(0.2));
  CHECK(out.A_hat.isApprox(Mat(dA.colwise().mean()), 1e-12));
}

TEST_CASE("all five tensors match the scalar-loop oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const int X = 3, Y = 2, Z = 4, k = 2;
    const auto p = init_coattention(Z, k, rng);
    const Mat dA = testing::random_mat(X, Z, rng);
    const Mat dB = testing::random_mat(Y, Z, rng);
    const auto got = coattend_plain(p, dA, dB);
    const auto want = scalar_coattend(p, dA, dB);
    CHECK((got.affinity - want.affinity).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((got.a_A - want.a_A).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((got.a_B - want.a_B).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((got.A_hat - want.A_hat).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((got.B_hat - want.B_hat).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("1D usage over single-row graph embeddings") {
  Rng rng(7);
  const int G = 6;
  const auto p = init_coattention(G, 4, rng);
  const Mat tg = testing::random_mat(1, G, rng);
  const Mat ug = testing::random_mat(1, G, rng);
  const auto out = coattend_plain(p, tg, ug);
  CHECK(out.A_hat.isApprox(tg, 1e-12));
  CHECK(out.B_hat.isApprox(ug, 1e-12));
  CHECK(out.affinity.rows() == 1);
  CHECK(out.affinity.cols() == 1);
}

TEST_CASE("attention rows are simplex points for any finite input") {
  Rng rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const int X = 1 + static_cast<int>(rng.uniform_int(6));
    const int Y = 1 + static_cast<int>(rng.uniform_int(6));
    const int Z = 1 + static_cast<int>(rng.uniform_int(7));
    const int k = 1 + static_cast<int>(rng.uniform_int(4));
    const auto p = init_coattention(Z, k, rng);
    const Mat dA = testing::random_mat(X, Z, rng, 3.0);
    const Mat dB = testing::random_mat(Y, Z, rng, 3.0);
    const auto out = coattend_plain(p, dA, dB);
    CHECK(out.a_A.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(out.a_B.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(out.a_A.minCoeff() >= 0.0);
    CHECK(out.a_B.minCoeff() >= 0.0);
  }
}

TEST_CASE("A_hat stays in the convex hull of the rows of d_A") {
  Rng rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = init_coattention(3, 2, rng);
    const Mat dA = testing::random_mat(4, 3, rng);
    const Mat dB = testing::random_mat(3, 3, rng);
    const auto out = coattend_plain(p, dA, dB);
    // hull membership per coordinate interval (necessary condition) plus
    // exact reconstruction from the attention weights
    Mat recon = Mat::Zero(1, 3);
    for (long x = 0; x < 4; ++x) recon += out.a_A(0, x) * dA.row(x);
    CHECK(recon.isApprox(out.A_hat, 1e-9));
    for (long z = 0; z < 3; ++z) {
      CHECK(out.A_hat(0, z) <= dA.col(z).maxCoeff() + 1e-12);
      CHECK(out.A_hat(0, z) >= dA.col(z).minCoeff() - 1e-12);
    }
  }
}

TEST_CASE("permuting rows of d_A permutes a_A and leaves A_hat unchanged") {
  Rng rng(23);
  const auto p = init_coattention(5, 3, rng);
  const Mat dA = testing::random_mat(4, 5, rng);
  const Mat dB = testing::random_mat(3, 5, rng);
  const auto base = coattend_plain(p, dA, dB);

  const std::vector<int> perm = {2, 0, 3, 1};
  Mat dA_p(4, 5);
  for (int r = 0; r < 4; ++r) dA_p.row(r) = dA.row(perm[static_cast<std::size_t>(r)]);
  const auto permuted = coattend_plain(p, dA_p, dB);
  for (int r = 0; r < 4; ++r)
    CHECK(permuted.a_A(0, r) ==
          doctest::Approx(base.a_A(0, perm[static_cast<std::size_t>(r)])).epsilon(1e-12));
  CHECK(permuted.A_hat.isApprox(base.A_hat, 1e-9));
  CHECK(permuted.B_hat.isApprox(base.B_hat, 1e-9));
}

TEST_CASE("zero-padded rows participate with equal attention weights") {
  // evidence tensors pad with zero rows; those rows all get the same logit
  Rng rng(29);
  const auto p = init_coattention(4, 3, rng);
  Mat dA = Mat::Zero(6, 4);
  dA.row(0) = testing::random_mat(1, 4, rng);
  dA.row(1) = testing::random_mat(1, 4, rng);
  const Mat dB = testing::random_mat(3, 4, rng);
  const auto out = coattend_plain(p, dA, dB);
  for (long x = 3; x < 6; ++x)
    CHECK(out.a_A(0, x) == doctest::Approx(out.a_A(0, 2)).epsilon(1e-12));
  CHECK(out.a_A.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("shape mismatches raise a dimension error naming the operands") {
  Rng rng(3);
  const auto p = init_coattention(4, 2, rng);
  const Mat good = testing::random_mat(2, 4, rng);
  const Mat bad = testing::random_mat(2, 5, rng);
  ad::Tape tape;
  ad::Binder binder(tape, false);
  CHECK_THROWS_WITH_AS(
      coattend(binder, p, tape.leaf(good), tape.leaf(bad)),
      doctest::Contains("inner dims differ"), std::invalid_argument);
}

TEST_CASE("gradients through both attended outputs match finite differences") {
  Rng rng(64);
  for (int trial = 0; trial < 4; ++trial) {
    auto p = init_coattention(3, 2, rng);
    Mat dA = testing::random_mat(3, 3, rng);
    Mat dB = testing::random_mat(2, 3, rng);
    const Mat wA = testing::random_mat(1, 3, rng);
    const Mat wB = testing::random_mat(1, 3, rng);

    auto loss_value = [&]() {
      ad::Tape tape;
      ad::Binder binder(tape, false);
      const auto out = coattend(binder, p, tape.leaf(dA), tape.leaf(dB));
      return (ad::sum(ad::mul(out.A_hat, tape.leaf(wA))).value()(0, 0) +
              ad::sum(ad::mul(out.B_hat, tape.leaf(wB))).value()(0, 0));
    };

    ad::Tape tape;
    ad::Binder binder(tape, true);
    const auto vA = tape.leaf(dA, true);
    const auto vB = tape.leaf(dB, true);
    const auto out = coattend(binder, p, vA, vB);
    const auto loss = ad::add(ad::sum(ad::mul(out.A_hat, tape.leaf(wA))),
                              ad::sum(ad::mul(out.B_hat, tape.leaf(wB))));
    tape.backward(loss);

    const auto result = testing::gradcheck(
        loss_value,
        {{"W_b", &p.W_b},
         {"W_A", &p.W_A},
         {"W_B", &p.W_B},
         {"w_hA", &p.w_hA},
         {"w_hB", &p.w_hB},
         {"d_A", &dA},
         {"d_B", &dB}},
        {binder.grad_of(p.W_b), binder.grad_of(p.W_A), binder.grad_of(p.W_B),
         binder.grad_of(p.w_hA), binder.grad_of(p.w_hB), vA.grad(),
         vB.grad()});
    CHECK_MESSAGE(result.pass(1e-3), result.worst, " rel err ",
                  result.max_rel_err);
  }
}
