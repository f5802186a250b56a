#include "fleximo/resize.hpp"

#include "fleximo/parallel.hpp"

#include <cmath>
#include <vector>

namespace fleximo {

std::string semantics_tag(ResizeSemantics) { return "half_pixel"; }

ResizeSemantics semantics_from_tag(const std::string& tag) {
    if (tag == "half_pixel") return ResizeSemantics::HALF_PIXEL;
    throw FormatError("unknown resize semantics tag '" + tag + "'");
}

namespace {

struct Tap {
    std::size_t lo, hi;
    double w_lo, w_hi;
};

// Per-target-index source taps for 1-D half-pixel bilinear sampling.
std::vector<Tap> taps_1d(std::size_t src, std::size_t dst) {
    std::vector<Tap> taps(dst);
    const double scale = static_cast<double>(src) / static_cast<double>(dst);
    for (std::size_t t = 0; t < dst; ++t) {
        double s = (static_cast<double>(t) + 0.5) * scale - 0.5;
        if (s < 0.0) s = 0.0;
        const double max_s = static_cast<double>(src - 1);
        if (s > max_s) s = max_s;
        const double fl = std::floor(s);
        const std::size_t lo = static_cast<std::size_t>(fl);
        const double frac = s - fl;
        const std::size_t hi = std::min(lo + 1, src - 1);
        taps[t] = {lo, hi, 1.0 - frac, frac};
    }
    return taps;
}

void check_dims(std::size_t h, std::size_t w, std::size_t dh, std::size_t dw) {
    if (h == 0 || w == 0 || dh == 0 || dw == 0) {
        throw DimensionError("resize: all dimensions must be >= 1, got (" +
                             std::to_string(h) + "," + std::to_string(w) + ") -> (" +
                             std::to_string(dh) + "," + std::to_string(dw) + ")");
    }
}

void check_square_kernel(const Tensor4& k) {
    if (k.dim(2) != k.dim(3)) {
        throw DimensionError("kernel resize requires square patches, got " +
                             std::to_string(k.dim(2)) + "x" + std::to_string(k.dim(3)));
    }
    if (k.dim(2) == 0) throw DimensionError("kernel patch size must be >= 1");
}

} // namespace

Mat bilinear_resize_2d(const Mat& img, std::size_t dst_h, std::size_t dst_w) {
    check_dims(img.rows(), img.cols(), dst_h, dst_w);
    const auto th = taps_1d(img.rows(), dst_h);
    const auto tw = taps_1d(img.cols(), dst_w);
    Mat out(dst_h, dst_w);
    for (std::size_t i = 0; i < dst_h; ++i) {
        const Tap& a = th[i];
        for (std::size_t j = 0; j < dst_w; ++j) {
            const Tap& b = tw[j];
            const double top = b.w_lo * img(a.lo, b.lo) + b.w_hi * img(a.lo, b.hi);
            const double bot = b.w_lo * img(a.hi, b.lo) + b.w_hi * img(a.hi, b.hi);
            out(i, j) = a.w_lo * top + a.w_hi * bot;
        }
    }
    return out;
}

ResizeOperator build_resize_matrix(std::size_t src_h, std::size_t src_w,
                                   std::size_t dst_h, std::size_t dst_w,
                                   ResizeSemantics semantics) {
    check_dims(src_h, src_w, dst_h, dst_w);
    const auto th = taps_1d(src_h, dst_h);
    const auto tw = taps_1d(src_w, dst_w);
    Mat m(dst_h * dst_w, src_h * src_w);
    // Row (i,j) of m holds the separable tap weights; accumulation (+=)
    // merges the duplicated tap that clamping produces at the last source
    // index, matching the basis-image definition exactly.
    for (std::size_t i = 0; i < dst_h; ++i) {
        const Tap& a = th[i];
        for (std::size_t j = 0; j < dst_w; ++j) {
            const Tap& b = tw[j];
            double* row = m.row_ptr(i * dst_w + j);
            row[a.lo * src_w + b.lo] += a.w_lo * b.w_lo;
            row[a.lo * src_w + b.hi] += a.w_lo * b.w_hi;
            row[a.hi * src_w + b.lo] += a.w_hi * b.w_lo;
            row[a.hi * src_w + b.hi] += a.w_hi * b.w_hi;
        }
    }
    ResizeOperator op;
    op.src_h = src_h;
    op.src_w = src_w;
    op.dst_h = dst_h;
    op.dst_w = dst_w;
    op.semantics = semantics;
    op.m = std::move(m);
    return op;
}

namespace {

// Shared slice-by-slice kernel transform: out slice = f(in slice).
Tensor4 map_slices(const Tensor4& k_old, std::size_t dst_patch,
                   const std::function<void(const double*, double*)>& f) {
    const std::size_t d_out = k_old.dim(0), c = k_old.dim(1), p = k_old.dim(2);
    Tensor4 k_new(d_out, c, dst_patch, dst_patch);
    const std::size_t in_px = p * p, out_px = dst_patch * dst_patch;
    const double* src = k_old.data().data();
    double* dst = k_new.data().data();
    parallel_for(d_out * c, [&](std::size_t s) {
        f(src + s * in_px, dst + s * out_px);
    });
    return k_new;
}

} // namespace

Tensor4 pi_resize_kernel(const Tensor4& k_old, std::size_t dst_patch,
                         ResizeSemantics semantics) {
    check_square_kernel(k_old);
    if (dst_patch == 0) throw DimensionError("target patch size must be >= 1");
    const std::size_t p = k_old.dim(2);
    if (dst_patch == p) return k_old;

    const ResizeOperator op = build_resize_matrix(p, p, dst_patch, dst_patch, semantics);
    const Mat pi_mt = pinv(transpose(op.m)); // shared across all slices
    const std::size_t in_px = p * p, out_px = dst_patch * dst_patch;

    return map_slices(k_old, dst_patch, [&](const double* in, double* out) {
        for (std::size_t r = 0; r < out_px; ++r) {
            const double* row = pi_mt.row_ptr(r);
            double s0 = 0, s1 = 0;
            std::size_t q = 0;
            for (; q + 2 <= in_px; q += 2) {
                s0 += row[q] * in[q];
                s1 += row[q + 1] * in[q + 1];
            }
            if (q < in_px) s0 += row[q] * in[q];
            out[r] = s0 + s1;
        }
    });
}

Tensor4 linear_resize_kernel(const Tensor4& k_old, std::size_t dst_patch,
                             ResizeSemantics) {
    check_square_kernel(k_old);
    if (dst_patch == 0) throw DimensionError("target patch size must be >= 1");
    const std::size_t p = k_old.dim(2);
    if (dst_patch == p) return k_old;

    return map_slices(k_old, dst_patch, [&](const double* in, double* out) {
        Mat slice(p, p, std::vector<double>(in, in + p * p));
        Mat resized = bilinear_resize_2d(slice, dst_patch, dst_patch);
        std::copy(resized.data().begin(), resized.data().end(), out);
    });
}

Mat resize_blocks(const Mat& img, std::size_t patch, std::size_t dst_patch,
                  ResizeSemantics) {
    if (patch == 0 || dst_patch == 0) throw DimensionError("patch sizes must be >= 1");
    if (img.rows() % patch != 0 || img.cols() % patch != 0) {
        throw TilingError("image " + std::to_string(img.rows()) + "x" +
                          std::to_string(img.cols()) + " is not divisible into " +
                          std::to_string(patch) + "x" + std::to_string(patch) + " blocks");
    }
    const std::size_t gh = img.rows() / patch, gw = img.cols() / patch;
    Mat out(gh * dst_patch, gw * dst_patch);
    Mat block(patch, patch);
    for (std::size_t bi = 0; bi < gh; ++bi) {
        for (std::size_t bj = 0; bj < gw; ++bj) {
            for (std::size_t r = 0; r < patch; ++r)
                for (std::size_t c = 0; c < patch; ++c)
                    block(r, c) = img(bi * patch + r, bj * patch + c);
            Mat rb = bilinear_resize_2d(block, dst_patch, dst_patch);
            for (std::size_t r = 0; r < dst_patch; ++r)
                for (std::size_t c = 0; c < dst_patch; ++c)
                    out(bi * dst_patch + r, bj * dst_patch + c) = rb(r, c);
        }
    }
    return out;
}

} // namespace fleximo
