#pragma once

#include "fleximo/linalg.hpp"
#include "fleximo/mat.hpp"

#include <string>
#include <utility>

namespace fleximo {

// Sampling convention for the bilinear operators. Only half-pixel centers
// are implemented: source coordinate s = (t + 0.5) * src/dst - 0.5, clamped
// to [0, src - 1], with weights (1 - frac, frac) on the floor/ceil neighbors.
enum class ResizeSemantics { HALF_PIXEL };

std::string semantics_tag(ResizeSemantics s);
ResizeSemantics semantics_from_tag(const std::string& tag);

// Explicit resize operator: m * vec(img) == vec(bilinear_resize_2d(img)).
struct ResizeOperator {
    std::size_t src_h = 0, src_w = 0;
    std::size_t dst_h = 0, dst_w = 0;
    ResizeSemantics semantics = ResizeSemantics::HALF_PIXEL;
    Mat m; // (dst_h*dst_w) x (src_h*src_w)
};

// Direct (matrix-free) separable bilinear resampler; the oracle the operator
// matrix is checked against.
Mat bilinear_resize_2d(const Mat& img, std::size_t dst_h, std::size_t dst_w);

ResizeOperator build_resize_matrix(std::size_t src_h, std::size_t src_w,
                                   std::size_t dst_h, std::size_t dst_w,
                                   ResizeSemantics semantics = ResizeSemantics::HALF_PIXEL);

// Patch-embedding kernel resize that preserves token dot products: each
// spatial slice w becomes pinv(M^T) * vec(w) with M the (P,P) -> (P',P')
// operator. The pseudo-inverse is computed once and shared across slices.
Tensor4 pi_resize_kernel(const Tensor4& k_old, std::size_t dst_patch,
                         ResizeSemantics semantics = ResizeSemantics::HALF_PIXEL);

// Baseline: plain bilinear resize of each kernel slice (no pseudo-inverse).
Tensor4 linear_resize_kernel(const Tensor4& k_old, std::size_t dst_patch,
                             ResizeSemantics semantics = ResizeSemantics::HALF_PIXEL);

// Applies the (P,P) -> (P',P') operator to each aligned P x P block of a
// single-channel image independently (the per-patch image resize used by the
// end-to-end token-recovery property).
Mat resize_blocks(const Mat& img, std::size_t patch, std::size_t dst_patch,
                  ResizeSemantics semantics = ResizeSemantics::HALF_PIXEL);

} // namespace fleximo
