#pragma once

#include <vector>

#include "endemic/ad.hpp"
#include "endemic/datamodel.hpp"
#include "endemic/rng.hpp"

namespace endemic {

using ad::Mat;

struct FusionParams {
  Mat ffn_W;   // C x (N_TF + N_UF)
  Mat ffn_b;   // C x 1
  Mat head_W;  // 2 x (2K + 2G + C)
  Mat head_b;  // 2 x 1
  double p_drop = 0.2;
  int context_dim() const { return static_cast<int>(ffn_W.rows()); }
};

FusionParams init_fusion(int n_features, int context_dim, int head_in_dim,
                         double p_drop, Rng& rng);

// d_TU = tanh(x W^T + b^T) for a 1 x (N_TF + N_UF) feature row.
ad::Var encode_context(ad::Binder& binder, const FusionParams& params,
                       const ad::Var& features);

enum class ForwardMode { kTrain, kEval };

// Concatenates the five interpolations, applies inverted dropout in train
// mode, a linear head and a softmax over the two classes. Throws a numeric
// error naming the component on non-finite input.
ad::Var classify(ad::Binder& binder, const FusionParams& params,
                 const ad::Var& ek_hat, const ad::Var& tt_hat,
                 const ad::Var& tg_hat, const ad::Var& ug_hat,
                 const ad::Var& d_tu, ForwardMode mode, Rng* rng);

// Standardizes contextual features with train-split statistics; masked
// time-variant entries land exactly on the masking token (0), i.e. the
// train mean in raw units.
struct ContextStandardizer {
  Mat mean;  // 1 x D
  Mat stdev; // 1 x D, zeros replaced by 1
  std::vector<bool> time_variant;

  static ContextStandardizer fit(const std::vector<Mat>& raw_rows,
                                 const FeatureSchema& tweet_schema,
                                 const FeatureSchema& user_schema);
  Mat standardize(const Mat& raw_row) const;
};

}  // namespace endemic
