#include "fleximo/tokenizer.hpp"

#include "fleximo/parallel.hpp"
#include "fleximo/resize.hpp"

#include <cmath>
#include <string>

namespace fleximo {

void validate_wavelengths(const WavelengthSpec& spec) {
    if (spec.lambdas_um.empty()) {
        throw ConfigError("wavelength list must contain at least one channel");
    }
    for (double l : spec.lambdas_um) {
        if (!std::isfinite(l) || l <= 0.0) {
            throw ConfigError("central wavelengths must be finite and > 0, got " +
                              std::to_string(l));
        }
    }
}

void ImageCHW::validate() const {
    if (h == 0 || w == 0 || c == 0) {
        throw DimensionError("image dimensions must be >= 1, got C=" + std::to_string(c) +
                             " H=" + std::to_string(h) + " W=" + std::to_string(w));
    }
    if (data.size() != c * h * w) {
        throw DimensionError("image data length " + std::to_string(data.size()) +
                             " does not equal C*H*W = " + std::to_string(c * h * w));
    }
    if (lambdas && lambdas->channels() != c) {
        throw SpectralMismatchError("image has " + std::to_string(c) +
                                    " channels but carries " +
                                    std::to_string(lambdas->channels()) + " wavelengths");
    }
    ensure_finite(data, "image");
}

std::size_t tokens_per_side(std::size_t side, std::size_t patch) {
    if (patch == 0) throw DimensionError("patch size must be >= 1");
    if (side % patch != 0) {
        throw TilingError("side " + std::to_string(side) + " is not divisible by patch " +
                          std::to_string(patch));
    }
    return side / patch;
}

TokenSequence patchify(const ImageCHW& img, const Tensor4& kernel,
                       const std::vector<double>& bias) {
    img.validate();
    const std::size_t d_out = kernel.dim(0), c = kernel.dim(1);
    const std::size_t p = kernel.dim(2);
    if (kernel.dim(3) != p) {
        throw DimensionError("patch kernel must be square, got " + std::to_string(p) +
                             "x" + std::to_string(kernel.dim(3)));
    }
    if (img.c != c) {
        throw SpectralMismatchError("image has " + std::to_string(img.c) +
                                    " channels but kernel expects " + std::to_string(c));
    }
    if (img.h % p != 0 || img.w % p != 0) {
        throw TilingError("image H=" + std::to_string(img.h) + " W=" + std::to_string(img.w) +
                          " not divisible by patch P=" + std::to_string(p));
    }
    if (bias.size() != d_out) {
        throw DimensionError("bias length " + std::to_string(bias.size()) +
                             " does not match kernel output dim " + std::to_string(d_out));
    }

    const std::size_t gh = img.h / p, gw = img.w / p;
    TokenSequence seq;
    seq.grid_h = gh;
    seq.grid_w = gw;
    seq.has_cls = false;
    seq.tokens = Mat(gh * gw, d_out);

    parallel_for(gh * gw, [&](std::size_t n) {
        const std::size_t bi = n / gw, bj = n % gw;
        double* row = seq.tokens.row_ptr(n);
        for (std::size_t d = 0; d < d_out; ++d) {
            double acc = bias[d];
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double* kbase = kernel.data().data() + ((d * c + ch) * p) * p;
                for (std::size_t pi = 0; pi < p; ++pi) {
                    const double* irow = img.data.data() +
                                         ((ch * img.h + bi * p + pi) * img.w + bj * p);
                    const double* krow = kbase + pi * p;
                    for (std::size_t pj = 0; pj < p; ++pj) acc += irow[pj] * krow[pj];
                }
            }
            row[d] = acc;
        }
    });
    return seq;
}

PosEmbed interp_pos_embed(const PosEmbed& pe, std::size_t new_grid) {
    if (pe.grid == 0 || new_grid == 0) {
        throw DimensionError("positional grids must be >= 1");
    }
    if (pe.data.rows() != pe.grid * pe.grid) {
        throw DimensionError("positional embedding has " + std::to_string(pe.data.rows()) +
                             " rows but grid " + std::to_string(pe.grid) + " needs " +
                             std::to_string(pe.grid * pe.grid));
    }
    PosEmbed out;
    out.grid = new_grid;
    out.cls_row = pe.cls_row;
    out.data = Mat(new_grid * new_grid, pe.data.cols());
    Mat plane(pe.grid, pe.grid);
    for (std::size_t d = 0; d < pe.data.cols(); ++d) {
        for (std::size_t i = 0; i < pe.grid; ++i)
            for (std::size_t j = 0; j < pe.grid; ++j)
                plane(i, j) = pe.data(i * pe.grid + j, d);
        const Mat resized = bilinear_resize_2d(plane, new_grid, new_grid);
        for (std::size_t i = 0; i < new_grid; ++i)
            for (std::size_t j = 0; j < new_grid; ++j)
                out.data(i * new_grid + j, d) = resized(i, j);
    }
    return out;
}

TokenSequence assemble(const TokenSequence& tokens, const PosEmbed& pe,
                       const std::vector<double>& cls) {
    if (tokens.has_cls) {
        throw AlignmentError("token sequence already contains a CLS row");
    }
    if (pe.grid != tokens.grid_h || pe.grid != tokens.grid_w) {
        throw AlignmentError("positional grid " + std::to_string(pe.grid) + "x" +
                             std::to_string(pe.grid) + " does not match token grid " +
                             std::to_string(tokens.grid_h) + "x" +
                             std::to_string(tokens.grid_w));
    }
    const std::size_t n = tokens.tokens.rows(), d = tokens.tokens.cols();
    if (pe.data.cols() != d || cls.size() != d ||
        (pe.cls_row && pe.cls_row->size() != d)) {
        throw DimensionError("embedding widths disagree in assemble (tokens D=" +
                             std::to_string(d) + ")");
    }
    TokenSequence out;
    out.grid_h = tokens.grid_h;
    out.grid_w = tokens.grid_w;
    out.has_cls = true;
    out.tokens = Mat(n + 1, d);
    for (std::size_t j = 0; j < d; ++j) {
        out.tokens(0, j) = cls[j] + (pe.cls_row ? (*pe.cls_row)[j] : 0.0);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            out.tokens(i + 1, j) = tokens.tokens(i, j) + pe.data(i, j);
    return out;
}

} // namespace fleximo
