#pragma once

#include "fleximo/tokenizer.hpp"
#include "fleximo/transformer.hpp"

#include <cstdint>
#include <vector>

namespace fleximo {

struct GeneratorConfig {
    std::size_t token_dim = 128; // D, even and divisible by heads
    std::size_t out_dim = 64;    // D_out
    std::size_t base_patch = 16; // P
    std::size_t depth = 2;
    std::size_t heads = 4;
    std::uint64_t seed = 0;
};

// Wavelength-conditioned hypernetwork parameters. The bias query token is an
// extra sequence row; the per-channel wavelength embeddings themselves act as
// the weight queries (one per channel), so kernels exist for every channel
// count without reconfiguration.
struct GeneratorWeights {
    GeneratorConfig config;
    std::vector<double> q_b;             // bias query token, length D
    Mat fc_w;                            // refinement FC, D x D
    std::vector<double> fc_b;
    std::vector<BlockWeights> blocks;
    Mat gw_w;                            // weight head, D x (P^2 * D_out)
    std::vector<double> gw_b;
    Mat gb_w;                            // bias head, D x D_out
    std::vector<double> gb_b;
};

struct DynamicKernel {
    Tensor4 weights; // [D_out, C, P, P]
    std::vector<double> bias; // length D_out
    WavelengthSpec lambdas;
};

// Sinusoidal per-channel encoding: for pair k, columns (2k, 2k+1) are
// sin and cos of lambda * 1000 / 10000^(2k/D). Throws ConfigError for odd D.
Mat encode_wavelengths(const WavelengthSpec& spec, std::size_t d);

// All parameters drawn from N(0, 0.02^2) via the seeded generator;
// deterministic function of (config, seed).
GeneratorWeights init_generator(const GeneratorConfig& config);

// Encode -> refine (GELU FC) -> transformer blocks over [channel rows;
// bias query], no positional encoding -> heads. Output weights are
// [D_out, C, P, P]; bias has length D_out.
DynamicKernel generate_kernel(const GeneratorWeights& w, const WavelengthSpec& spec);

// Patchify with a generated kernel; channel counts must agree.
TokenSequence embed_with_kernel(const ImageCHW& img, const DynamicKernel& k);

} // namespace fleximo
