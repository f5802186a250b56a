#include "fleximo/wavegen.hpp"

#include <cmath>
#include <string>

namespace fleximo {

namespace {

constexpr double kWavelengthScale = 1000.0; // micrometres -> nanometre-scale phase
constexpr double kEncodingBase = 10000.0;
constexpr double kLnEps = 1e-6;

void check_config(const GeneratorConfig& c) {
    if (c.token_dim == 0 || c.token_dim % 2 != 0) {
        throw ConfigError("generator token dim must be even and positive, got " +
                          std::to_string(c.token_dim));
    }
    if (c.heads == 0 || c.token_dim % c.heads != 0) {
        throw ConfigError("generator token dim " + std::to_string(c.token_dim) +
                          " must be divisible by heads = " + std::to_string(c.heads));
    }
    if (c.out_dim == 0 || c.base_patch == 0) {
        throw ConfigError("generator out dim and base patch must be >= 1");
    }
}

} // namespace

Mat encode_wavelengths(const WavelengthSpec& spec, std::size_t d) {
    if (d == 0 || d % 2 != 0) {
        throw ConfigError("wavelength encoding dim must be even, got " + std::to_string(d));
    }
    const std::size_t c = spec.channels();
    Mat e(c, d);
    for (std::size_t row = 0; row < c; ++row) {
        const double lambda = spec.lambdas_um[row];
        if (!std::isfinite(lambda)) {
            throw ConfigError("wavelength must be finite");
        }
        for (std::size_t k = 0; k < d / 2; ++k) {
            const double freq = kWavelengthScale /
                                std::pow(kEncodingBase,
                                         (2.0 * static_cast<double>(k)) /
                                             static_cast<double>(d));
            e(row, 2 * k) = std::sin(lambda * freq);
            e(row, 2 * k + 1) = std::cos(lambda * freq);
        }
    }
    return e;
}

GeneratorWeights init_generator(const GeneratorConfig& config) {
    check_config(config);
    const std::size_t d = config.token_dim;
    const std::size_t head_w = config.base_patch * config.base_patch * config.out_dim;

    GeneratorWeights w;
    w.config = config;
    Rng rng(config.seed);
    auto draw_vec = [&](std::size_t n) {
        std::vector<double> v = rng.normals(n);
        for (double& x : v) x *= 0.02;
        return v;
    };
    auto draw_mat = [&](std::size_t r, std::size_t c) {
        return Mat(r, c, draw_vec(r * c));
    };

    w.q_b = draw_vec(d);
    w.fc_w = draw_mat(d, d);
    w.fc_b = draw_vec(d);
    BlockInit init; // every parameter sampled, including layer-norm affines
    init.weight_std = 0.02;
    init.unit_layer_norm = false;
    init.zero_bias = false;
    w.blocks.reserve(config.depth);
    for (std::size_t b = 0; b < config.depth; ++b) {
        w.blocks.push_back(init_block(d, 4 * d, rng, init));
    }
    w.gw_w = draw_mat(d, head_w);
    w.gw_b = draw_vec(head_w);
    w.gb_w = draw_mat(d, config.out_dim);
    w.gb_b = draw_vec(config.out_dim);
    return w;
}

DynamicKernel generate_kernel(const GeneratorWeights& w, const WavelengthSpec& spec) {
    check_config(w.config);
    validate_wavelengths(spec);
    const std::size_t c = spec.channels();
    const std::size_t d = w.config.token_dim;
    const std::size_t p = w.config.base_patch;
    const std::size_t d_out = w.config.out_dim;

    const Mat e = encode_wavelengths(spec, d);
    const Mat e_ref = gelu(linear(e, w.fc_w, w.fc_b)); // refined embeddings E'

    // Sequence: one row per channel, then the bias query. No positional
    // encoding, so the blocks treat channel rows symmetrically.
    Mat x(c + 1, d);
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < d; ++j) x(i, j) = e_ref(i, j);
    for (std::size_t j = 0; j < d; ++j) x(c, j) = w.q_b[j];

    for (const BlockWeights& blk : w.blocks) {
        x = block_forward(x, blk, w.config.heads, kLnEps);
    }

    // Weight head reads the channel positions (plus the refined embedding
    // residual); bias head reads the query position.
    Mat z_w(c, d);
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < d; ++j) z_w(i, j) = x(i, j) + e_ref(i, j);
    const Mat w_dyn = linear(z_w, w.gw_w, w.gw_b); // C x (P^2 * D_out)

    Mat z_b(1, d);
    for (std::size_t j = 0; j < d; ++j) z_b(0, j) = x(c, j);
    const Mat b_dyn = linear(z_b, w.gb_w, w.gb_b); // 1 x D_out

    DynamicKernel k;
    k.lambdas = spec;
    k.weights = Tensor4(d_out, c, p, p);
    for (std::size_t dd = 0; dd < d_out; ++dd)
        for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = 0; j < p; ++j)
                    k.weights(dd, ch, i, j) = w_dyn(ch, (dd * p + i) * p + j);
    k.bias.resize(d_out);
    for (std::size_t dd = 0; dd < d_out; ++dd) k.bias[dd] = b_dyn(0, dd);
    return k;
}

TokenSequence embed_with_kernel(const ImageCHW& img, const DynamicKernel& k) {
    if (img.c != k.weights.dim(1)) {
        throw SpectralMismatchError("image has " + std::to_string(img.c) +
                                    " channels but dynamic kernel expects " +
                                    std::to_string(k.weights.dim(1)));
    }
    return patchify(img, k.weights, k.bias);
}

} // namespace fleximo
