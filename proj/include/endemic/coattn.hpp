#pragma once

#include "endemic/ad.hpp"
#include "endemic/rng.hpp"

namespace endemic {

using ad::Mat;

// Learnable weights of one parallel co-attention block over two sequences
// sharing inner dimension Z.
struct CoAttentionParams {
  Mat W_b;   // Z x Z
  Mat W_A;   // k x Z
  Mat W_B;   // k x Z
  Mat w_hA;  // k x 1
  Mat w_hB;  // k x 1
  int inner_dim() const { return static_cast<int>(W_b.rows()); }
  int hidden_dim() const { return static_cast<int>(W_A.rows()); }
};

CoAttentionParams init_coattention(int z, int k, Rng& rng);

struct CoAttentionVars {
  ad::Var A_hat;     // 1 x Z
  ad::Var B_hat;     // 1 x Z
  ad::Var a_A;       // 1 x X attention over rows of d_A
  ad::Var a_B;       // 1 x Y attention over rows of d_B
  ad::Var affinity;  // Y x X
};

// Parallel co-attention between d_A (X x Z) and d_B (Y x Z):
//   affinity = tanh(d_A W_b d_B^T)^T            (Y x X)
//   H_A = tanh(W_A d_A^T + (W_B d_B^T) C)       (k x X)
//   H_B = tanh(W_B d_B^T + (W_A d_A^T) C^T)     (k x Y)
//   a_A = softmax(w_hA^T H_A), a_B = softmax(w_hB^T H_B)
//   A_hat = sum_i a_A[i] d_A[i],  B_hat = sum_i a_B[i] d_B[i]
// Throws on a shape mismatch, naming the operands.
CoAttentionVars coattend(ad::Binder& binder, const CoAttentionParams& params,
                         const ad::Var& d_A, const ad::Var& d_B);

struct CoAttentionOutput {
  Mat A_hat, B_hat, a_A, a_B, affinity;
};

// Forward-only evaluation.
CoAttentionOutput coattend_plain(const CoAttentionParams& params,
                                 const Mat& d_A, const Mat& d_B);

}  // namespace endemic
