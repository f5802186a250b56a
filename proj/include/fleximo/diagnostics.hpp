#pragma once

#include "fleximo/mat.hpp"

#include <cstdint>
#include <string>

namespace fleximo {

enum class ResizeStrategy { PI, LINEAR };

std::string strategy_tag(ResizeStrategy s);
ResizeStrategy strategy_from_tag(const std::string& tag);

// Monte Carlo token-fidelity statistics for one kernel-resize strategy.
// Patches are drawn x ~ N(0, I); errors compare original-patch tokens
// against resized-patch tokens under the resized kernel.
struct FidelityReport {
    std::string strategy;
    std::size_t src_patch = 0, dst_patch = 0, trials = 0;
    double mean_dot_err = 0.0;
    double max_dot_err = 0.0;
    double norm_ratio_mean = 0.0;
    double norm_ratio_std = 0.0;
    double mc_loss = 0.0; // mean over trials of the summed squared dot errors
};

FidelityReport token_fidelity(const Tensor4& k_old, ResizeStrategy strategy,
                              std::size_t dst_patch, std::size_t trials,
                              std::uint64_t seed);

// Centered 2-D discrete Fourier magnitude (raw |F|), DC at
// (floor(H/2), floor(W/2)). Direct row-column DFT.
Mat dft2_magnitude_raw(const Mat& img);

// log(1 + |F|) of the centered magnitude.
Mat dft2_magnitude(const Mat& img);

// Per-pixel Shannon entropy (bits) of the window histogram; intensities are
// min-max normalized over the whole image into `bins` bins, windows are
// edge-clamped. Constant images give an all-zero map.
Mat local_entropy(const Mat& img, std::size_t window, std::size_t bins);

// Max-norm residuals of the four defining conditions of the pseudo-inverse:
// m p m = m, p m p = p, (m p) symmetric, (p m) symmetric.
struct PenroseResiduals {
    double reconstruct = 0.0;  // ||M P M - M||_max
    double weak_inverse = 0.0; // ||P M P - P||_max
    double mp_symmetry = 0.0;  // ||(M P)^T - M P||_max
    double pm_symmetry = 0.0;  // ||(P M)^T - P M||_max
    double max() const;
};

PenroseResiduals moore_penrose_residuals(const Mat& m, const Mat& m_pinv);

} // namespace fleximo
