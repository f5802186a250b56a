#include "fleximo/encoder.hpp"

#include <string>

namespace fleximo {

namespace {
void check_config(const EncoderConfig& c) {
    if (c.d == 0 || c.heads == 0 || c.d % c.heads != 0) {
        throw ConfigError("encoder width " + std::to_string(c.d) +
                          " must be a positive multiple of heads = " +
                          std::to_string(c.heads));
    }
    if (c.mlp_ratio == 0) throw ConfigError("mlp_ratio must be >= 1");
}
} // namespace

EncoderWeights init_encoder(const EncoderConfig& config) {
    check_config(config);
    EncoderWeights w;
    w.config = config;
    Rng rng(config.seed);
    BlockInit init;
    init.weight_std = 0.02;
    init.unit_layer_norm = true;
    init.zero_bias = true;
    w.blocks.reserve(config.depth);
    for (std::size_t b = 0; b < config.depth; ++b) {
        Rng block_rng = rng.split(b);
        w.blocks.push_back(
            init_block(config.d, config.d * config.mlp_ratio, block_rng, init));
    }
    w.final_g.assign(config.d, 1.0);
    w.final_b.assign(config.d, 0.0);
    return w;
}

Mat encoder_forward(const EncoderWeights& w, const Mat& tokens, EncoderTrace* trace) {
    check_config(w.config);
    if (tokens.cols() != w.config.d) {
        throw DimensionError("encoder expects token width " + std::to_string(w.config.d) +
                             ", got " + std::to_string(tokens.cols()));
    }
    if (trace) trace->attn_rowsum_dev.clear();
    Mat x = tokens;
    for (const BlockWeights& blk : w.blocks) {
        double dev = 0.0;
        x = block_forward(x, blk, w.config.heads, w.config.ln_eps,
                          trace ? &dev : nullptr);
        if (trace) trace->attn_rowsum_dev.push_back(dev);
    }
    return layer_norm(x, w.final_g, w.final_b, w.config.ln_eps);
}

TokenSequence encoder_forward(const EncoderWeights& w, const TokenSequence& tokens,
                              EncoderTrace* trace) {
    TokenSequence out = tokens;
    out.tokens = encoder_forward(w, tokens.tokens, trace);
    return out;
}

} // namespace fleximo
