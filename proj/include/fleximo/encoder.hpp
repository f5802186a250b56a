#pragma once

#include "fleximo/tokenizer.hpp"
#include "fleximo/transformer.hpp"

#include <cstdint>
#include <vector>

namespace fleximo {

struct EncoderConfig {
    std::size_t depth = 4;
    std::size_t heads = 4;
    std::size_t d = 128;
    std::size_t mlp_ratio = 4;
    double ln_eps = 1e-6;
    std::uint64_t seed = 0;
};

struct EncoderWeights {
    EncoderConfig config;
    std::vector<BlockWeights> blocks;
    std::vector<double> final_g, final_b; // final layer norm
};

// Per-block maximum |attention row sum - 1| recorded during a forward pass.
struct EncoderTrace {
    std::vector<double> attn_rowsum_dev;
};

// Deterministic initialization: linear weights N(0, 0.02^2), biases zero,
// layer norms (1, 0). Throws ConfigError when d is not divisible by heads.
EncoderWeights init_encoder(const EncoderConfig& config);

// Pre-norm blocks then final layer norm; shape-preserving.
Mat encoder_forward(const EncoderWeights& w, const Mat& tokens,
                    EncoderTrace* trace = nullptr);
TokenSequence encoder_forward(const EncoderWeights& w, const TokenSequence& tokens,
                              EncoderTrace* trace = nullptr);

} // namespace fleximo
