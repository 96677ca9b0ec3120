#include "endemic/coattn.hpp"

#include <stdexcept>
#include <string>

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

CoAttentionParams init_coattention(int z, int k, Rng& rng) {
  if (k < 1 || z < 1) throw std::invalid_argument("coattention dims must be >= 1");
  CoAttentionParams p;
  p.W_b = uniform_fan_in(z, z, z, rng);
  p.W_A = uniform_fan_in(k, z, z, rng);
  p.W_B = uniform_fan_in(k, z, z, rng);
  p.w_hA = uniform_fan_in(k, 1, k, rng);
  p.w_hB = uniform_fan_in(k, 1, k, rng);
  return p;
}

CoAttentionVars coattend(ad::Binder& binder, const CoAttentionParams& params,
                         const ad::Var& d_A, const ad::Var& d_B) {
  const long z = params.inner_dim();
  if (d_A.cols() != z || d_B.cols() != z)
    throw std::invalid_argument(
        "coattend: inner dims differ (d_A " + std::to_string(d_A.cols()) +
        ", d_B " + std::to_string(d_B.cols()) + ", W_b " + std::to_string(z) +
        ")");
  if (d_A.rows() < 1 || d_B.rows() < 1)
    throw std::invalid_argument("coattend: empty input sequence");

  const ad::Var W_b = binder(params.W_b);
  const ad::Var W_A = binder(params.W_A);
  const ad::Var W_B = binder(params.W_B);
  const ad::Var w_hA = binder(params.w_hA);
  const ad::Var w_hB = binder(params.w_hB);

  const ad::Var dAT = ad::transpose(d_A);  // Z x X
  const ad::Var dBT = ad::transpose(d_B);  // Z x Y

  // Y x X
  const ad::Var affinity =
      ad::tanh(ad::transpose(ad::matmul(ad::matmul(d_A, W_b), dBT)));

  const ad::Var projA = ad::matmul(W_A, dAT);  // k x X
  const ad::Var projB = ad::matmul(W_B, dBT);  // k x Y

  const ad::Var H_A = ad::tanh(ad::add(projA, ad::matmul(projB, affinity)));
  const ad::Var H_B =
      ad::tanh(ad::add(projB, ad::matmul(projA, ad::transpose(affinity))));

  const ad::Var a_A = ad::softmax_row(ad::matmul(ad::transpose(w_hA), H_A));
  const ad::Var a_B = ad::softmax_row(ad::matmul(ad::transpose(w_hB), H_B));

  CoAttentionVars out;
  out.affinity = affinity;
  out.a_A = a_A;
  out.a_B = a_B;
  out.A_hat = ad::matmul(a_A, d_A);
  out.B_hat = ad::matmul(a_B, d_B);
  return out;
}

CoAttentionOutput coattend_plain(const CoAttentionParams& params,
                                 const Mat& d_A, const Mat& d_B) {
  ad::Tape tape;
  ad::Binder binder(tape, false);
  const auto v = coattend(binder, params, tape.leaf(d_A), tape.leaf(d_B));
  return {v.A_hat.value(), v.B_hat.value(), v.a_A.value(), v.a_B.value(),
          v.affinity.value()};
}

}  // namespace endemic
