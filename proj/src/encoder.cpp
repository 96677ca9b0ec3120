#include "endemic/encoder.hpp"

#include "endemic/rng.hpp"
#include "endemic/text.hpp"

namespace endemic {

HashProjectionEncoder::HashProjectionEncoder(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {}

Eigen::VectorXd HashProjectionEncoder::encode(const std::string& text) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim_);
  for (const auto& tok : tokenize(text)) {
    Rng token_rng(fnv1a64(tok) ^ seed_);
    for (int i = 0; i < dim_; ++i) acc[i] += token_rng.normal();
  }
  const double norm = acc.norm();
  if (norm > 0.0) acc /= norm;
  return acc;
}

std::unique_ptr<SentenceEncoder> make_default_encoder(int dim,
                                                      std::uint64_t seed) {
  return std::make_unique<HashProjectionEncoder>(dim, seed);
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace endemic
