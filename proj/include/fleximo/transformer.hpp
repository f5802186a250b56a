#pragma once

#include "fleximo/mat.hpp"
#include "fleximo/rng.hpp"

#include <vector>

namespace fleximo {

// Scaled dot-product attention softmax(q k^T / sqrt(d_k)) v with row-wise,
// max-subtracted softmax. If rowsum_dev is given, receives the maximum
// |row sum - 1| of the normalized attention matrix (a numerical self-check;
// mathematically every row sums to 1).
Mat attention(const Mat& q, const Mat& k, const Mat& v, std::size_t d_k,
              double* rowsum_dev = nullptr);

double gelu(double x);
Mat gelu(const Mat& x);

// y = x * w + b with b broadcast across rows; w is in_dim x out_dim.
Mat linear(const Mat& x, const Mat& w, const std::vector<double>& b);

// Row-wise layer normalization with affine parameters.
Mat layer_norm(const Mat& x, const std::vector<double>& gamma,
               const std::vector<double>& beta, double eps);

// One pre-norm transformer block: LN -> multi-head self-attention ->
// residual; LN -> GELU MLP -> residual. No positional encoding anywhere,
// which is what makes the block permutation-equivariant over rows.
struct BlockWeights {
    Mat w_q, w_k, w_v, w_o; // D x D
    std::vector<double> b_q, b_k, b_v, b_o;
    std::vector<double> ln1_g, ln1_b, ln2_g, ln2_b;
    Mat w_fc1, w_fc2; // D x hidden, hidden x D
    std::vector<double> b_fc1, b_fc2;
};

struct BlockInit {
    double weight_std = 0.02; // N(0, std^2) for weight matrices
    bool unit_layer_norm = false; // gamma = 1, beta = 0 instead of draws
    bool zero_bias = false;       // biases zero instead of draws
};

BlockWeights init_block(std::size_t d, std::size_t hidden, Rng& rng,
                        const BlockInit& init);

// If attn_rowsum_dev is given, receives the max row-sum deviation across all
// heads of this block's attention.
Mat block_forward(const Mat& x, const BlockWeights& w, std::size_t heads,
                  double ln_eps, double* attn_rowsum_dev = nullptr);

} // namespace fleximo
