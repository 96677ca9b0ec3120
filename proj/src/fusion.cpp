#include "endemic/fusion.hpp"

#include <cmath>
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

void check_finite(const ad::Var& v, const char* name) {
  if (!v.value().allFinite())
    throw std::runtime_error(std::string("classify: non-finite input in ") +
                             name);
}

}  // namespace

FusionParams init_fusion(int n_features, int context_dim, int head_in_dim,
                         double p_drop, Rng& rng) {
  if (p_drop < 0.0 || p_drop >= 1.0)
    throw std::invalid_argument("p_drop must be in [0,1)");
  FusionParams p;
  p.ffn_W = uniform_fan_in(context_dim, n_features, n_features, rng);
  p.ffn_b = Mat::Zero(context_dim, 1);
  p.head_W = uniform_fan_in(2, head_in_dim, head_in_dim, rng);
  p.head_b = Mat::Zero(2, 1);
  p.p_drop = p_drop;
  return p;
}

ad::Var encode_context(ad::Binder& binder, const FusionParams& params,
                       const ad::Var& features) {
  if (features.cols() != params.ffn_W.cols() || features.rows() != 1)
    throw std::invalid_argument(
        "encode_context: feature row is " + std::to_string(features.rows()) +
        "x" + std::to_string(features.cols()) + ", FFN expects 1x" +
        std::to_string(params.ffn_W.cols()));
  const ad::Var W = binder(params.ffn_W);
  const ad::Var b = binder(params.ffn_b);
  return ad::tanh(
      ad::add(ad::matmul(features, ad::transpose(W)), ad::transpose(b)));
}

ad::Var classify(ad::Binder& binder, const FusionParams& params,
                 const ad::Var& ek_hat, const ad::Var& tt_hat,
                 const ad::Var& tg_hat, const ad::Var& ug_hat,
                 const ad::Var& d_tu, ForwardMode mode, Rng* rng) {
  check_finite(ek_hat, "ek_hat");
  check_finite(tt_hat, "tt_hat");
  check_finite(tg_hat, "tg_hat");
  check_finite(ug_hat, "ug_hat");
  check_finite(d_tu, "d_tu");

  ad::Var d = ad::hconcat({ek_hat, tt_hat, tg_hat, ug_hat, d_tu});
  if (d.cols() != params.head_W.cols())
    throw std::invalid_argument(
        "classify: concatenated dim " + std::to_string(d.cols()) +
        " != head input dim " + std::to_string(params.head_W.cols()));

  if (mode == ForwardMode::kTrain && params.p_drop > 0.0) {
    if (!rng)
      throw std::invalid_argument("classify: train mode requires an rng");
    // inverted dropout: kept units scaled by 1/(1-p), eval needs no rescale
    Mat mask(1, d.cols());
    const double keep = 1.0 - params.p_drop;
    for (long j = 0; j < d.cols(); ++j)
      mask(0, j) = rng->uniform() < keep ? 1.0 / keep : 0.0;
    d = ad::mul(d, binder.tape().leaf(mask));
  }

  const ad::Var logits = ad::add(ad::matmul(d, ad::transpose(binder(params.head_W))),
                                 ad::transpose(binder(params.head_b)));
  return ad::softmax_row(logits);
}

ContextStandardizer ContextStandardizer::fit(
    const std::vector<Mat>& raw_rows, const FeatureSchema& tweet_schema,
    const FeatureSchema& user_schema) {
  if (raw_rows.empty())
    throw std::invalid_argument("ContextStandardizer: no rows");
  const long d = raw_rows.front().cols();
  Mat mean = Mat::Zero(1, d);
  for (const auto& r : raw_rows) mean += r;
  mean /= static_cast<double>(raw_rows.size());
  Mat var = Mat::Zero(1, d);
  for (const auto& r : raw_rows)
    var += (r - mean).array().square().matrix();
  var /= static_cast<double>(raw_rows.size());
  ContextStandardizer s;
  s.mean = mean;
  s.stdev = var.array().sqrt().matrix();
  for (long j = 0; j < d; ++j)
    if (s.stdev(0, j) == 0.0) s.stdev(0, j) = 1.0;
  for (bool f : tweet_schema.time_variant) s.time_variant.push_back(f);
  for (bool f : user_schema.time_variant) s.time_variant.push_back(f);
  if (static_cast<long>(s.time_variant.size()) != d)
    throw std::invalid_argument(
        "ContextStandardizer: schema sizes do not match feature rows");
  return s;
}

Mat ContextStandardizer::standardize(const Mat& raw_row) const {
  if (raw_row.cols() != mean.cols())
    throw std::invalid_argument("standardize: schema error, got " +
                                std::to_string(raw_row.cols()) +
                                " features, expected " +
                                std::to_string(mean.cols()));
  return ((raw_row - mean).array() / stdev.array()).matrix();
}

}  // namespace endemic
