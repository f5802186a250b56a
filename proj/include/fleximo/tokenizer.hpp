#pragma once

#include "fleximo/mat.hpp"

#include <optional>
#include <vector>

namespace fleximo {

// Central wavelengths in micrometres, one per channel.
struct WavelengthSpec {
    std::vector<double> lambdas_um;
    std::size_t channels() const { return lambdas_um.size(); }
};

// Throws ConfigError unless C >= 1 and every wavelength is finite and > 0.
void validate_wavelengths(const WavelengthSpec& spec);

// Channel-major image, data laid out [c][h][w].
struct ImageCHW {
    std::size_t c = 0, h = 0, w = 0;
    std::vector<double> data;
    std::optional<WavelengthSpec> lambdas;
    std::optional<double> gsd_m; // ground sample distance, metres/pixel

    double at(std::size_t ch, std::size_t y, std::size_t x) const {
        return data[(ch * h + y) * w + x];
    }
    double& at(std::size_t ch, std::size_t y, std::size_t x) {
        return data[(ch * h + y) * w + x];
    }
    // Validates data length, dims >= 1, and lambdas length when present.
    void validate() const;
};

struct TokenSequence {
    Mat tokens; // N x D (N+1 x D when has_cls)
    std::size_t grid_h = 0, grid_w = 0;
    bool has_cls = false;
    std::size_t dim() const { return tokens.cols(); }
};

// Learnable positional embedding over a square g x g token grid; the CLS
// row, when present, is carried separately and never interpolated.
struct PosEmbed {
    std::size_t grid = 0;
    Mat data; // g*g x D
    std::optional<std::vector<double>> cls_row;
};

// Token count for one image side: throws TilingError if side % patch != 0.
std::size_t tokens_per_side(std::size_t side, std::size_t patch);

// Non-overlapping stride-P patch embedding: token (i,j)[d] = bias[d] +
// <vec(patch_ij), vec(kernel[d])>. kernel is [D, C, P, P].
TokenSequence patchify(const ImageCHW& img, const Tensor4& kernel,
                       const std::vector<double>& bias);

// Per-dimension bilinear resize of the positional grid to new_grid.
PosEmbed interp_pos_embed(const PosEmbed& pe, std::size_t new_grid);

// Adds positional rows to the tokens and prepends the CLS row (plus the
// positional CLS row when present).
TokenSequence assemble(const TokenSequence& tokens, const PosEmbed& pe,
                       const std::vector<double>& cls);

} // namespace fleximo
