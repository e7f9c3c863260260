#pragma once

// Decoder plumbing shared between generation and loss evaluation. Not part
// of the public interface.

#include "deckgen/model.hpp"
#include "deckgen/types.hpp"

namespace deckgen::detail_model {

Vec affine(const Tensor& m, const Vec& b, const Vec& x);

Vec embed_row(const Tensor& table, std::size_t id);

struct DecoderStep {
  Vec dist;
  double gate = 0.0;
};

// Advances the decoder state/context by one step and returns the mixed
// generate/copy output distribution.
DecoderStep decoder_advance(Vec& state, Vec& context, std::size_t prev_token,
                            const std::vector<Vec>& enc_out,
                            const std::vector<std::size_t>& source_ids, const ModelWeights& w);

struct EncodedSource {
  std::vector<Vec> outputs;
  Vec state;  // decoder start, after the bridge
  Vec context;
};

EncodedSource encode_source(const std::vector<std::size_t>& source_ids, const Vec& h_obj,
                            const ModelWeights& w, bool use_hobj);

std::vector<std::size_t> vocab_ids(const std::string& text, const Vocabulary& vocab);

}  // namespace deckgen::detail_model
