#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "endemic/ad.hpp"
#include "endemic/rng.hpp"
#include "endemic/text.hpp"

namespace endemic {

using ad::Mat;

// One LSTM direction. Gate order in the packed matrices is [i, f, g, o].
struct LstmCellParams {
  Mat W;  // 4H x E
  Mat U;  // 4H x H
  Mat b;  // 4H x 1
  int hidden() const { return static_cast<int>(U.cols()); }
};

struct BiLstmParams {
  Mat embedding;  // V x E
  LstmCellParams fwd;
  LstmCellParams bwd;
  int embed_dim() const { return static_cast<int>(embedding.cols()); }
  int output_dim() const { return 2 * fwd.hidden(); }  // K
};

// Uniform fan-in-scaled init. K must be even; hidden size is K/2.
BiLstmParams init_bilstm(int vocab_size, int embed_dim, int output_dim,
                         Rng& rng);

// Embedded token rows (N x E) as a tape node; table gradients flow through
// the gather when the binder tracks them.
ad::Var embed_tokens(ad::Binder& binder, const BiLstmParams& params,
                     const std::vector<int>& token_ids);

// Bidirectional encoding of an embedded sequence: row t of the N x K output
// is [forward h_t ; backward h_t].
ad::Var encode_embedded(ad::Binder& binder, const BiLstmParams& params,
                        const ad::Var& embedded);

// Single-direction pass over the embedded rows (reversed = right-to-left);
// returns N x H with row t holding that direction's hidden state at t.
ad::Var lstm_direction(ad::Binder& binder, const LstmCellParams& cell,
                       const ad::Var& embedded, bool reversed);

// Convenience non-tape forward for the plain op contract.
Mat encode_text(const std::string& text, const Vocabulary& vocab,
                const BiLstmParams& params, int n);

}  // namespace endemic
