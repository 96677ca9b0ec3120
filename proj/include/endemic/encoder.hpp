#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>

namespace endemic {

// Fixed-dimension deterministic sentence embedding. Implementations must
// return finite vectors and give equal texts equal encodings.
class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;
  virtual Eigen::VectorXd encode(const std::string& text) const = 0;
  virtual int dim() const = 0;
};

// Seeded random projection of a token-hash bag vector, unit-normalized.
// Each token hash owns a fixed pseudo-random direction; a text's encoding is
// the normalized sum over its tokens. Hermetic stand-in for a pretrained
// sentence encoder: identical texts map to identical unit vectors and token
// overlap drives cosine similarity.
class HashProjectionEncoder : public SentenceEncoder {
 public:
  HashProjectionEncoder(int dim, std::uint64_t seed);
  Eigen::VectorXd encode(const std::string& text) const override;
  int dim() const override { return dim_; }

 private:
  int dim_;
  std::uint64_t seed_;
};

std::unique_ptr<SentenceEncoder> make_default_encoder(int dim,
                                                      std::uint64_t seed);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace endemic
