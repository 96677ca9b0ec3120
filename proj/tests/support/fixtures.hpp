#pragma once

#include <map>
#include <string>
#include <vector>

#include "endemic/ad.hpp"
#include "endemic/corpus.hpp"
#include "endemic/datamodel.hpp"
#include "endemic/encoder.hpp"
#include "endemic/knowledge.hpp"
#include "endemic/rng.hpp"

namespace endemic::testing {

using ad::Mat;

inline Tweet make_tweet(const std::string& id, const std::string& user_id,
                        const std::string& text, std::int64_t created_at,
                        Label label = Label::kUnlabelled) {
  Tweet t;
  t.id = id;
  t.user_id = user_id;
  t.text = text;
  t.created_at = created_at;
  t.tweet_features = {0.0, 0.0, 0.5, 0.0};
  t.label = label;
  return t;
}

inline UserProfile make_user(const std::string& id) {
  UserProfile u;
  u.id = id;
  u.followers = 10;
  u.followees = 5;
  u.verified = false;
  u.tweet_count = 3;
  u.user_features = {10.0, 5.0, 0.0, 3.0};
  return u;
}

// Encoder with hand-set unit vectors per exact text; anything unknown maps
// to a fixed fallback direction. Lets tests pin cosine values precisely.
class TableEncoder : public SentenceEncoder {
 public:
  explicit TableEncoder(int dim) : dim_(dim) {}
  void set(const std::string& text, const Eigen::VectorXd& v) {
    table_[text] = v;
  }
  // convenience: basis vector e_i
  void set_axis(const std::string& text, int axis) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
    v[axis] = 1.0;
    table_[text] = v;
  }
  Eigen::VectorXd encode(const std::string& text) const override {
    auto it = table_.find(text);
    if (it != table_.end()) return it->second;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
    v[dim_ - 1] = 1.0;
    return v;
  }
  int dim() const override { return dim_; }

 private:
  int dim_;
  std::map<std::string, Eigen::VectorXd> table_;
};

inline Mat random_mat(long rows, long cols, Rng& rng, double scale = 1.0) {
  Mat m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  return m;
}

}  // namespace endemic::testing
