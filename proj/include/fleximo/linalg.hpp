#pragma once

#include "fleximo/mat.hpp"

namespace fleximo {

// Standard matrix product; throws DimensionError naming both shapes when the
// inner dimensions disagree.
Mat matmul(const Mat& a, const Mat& b);

// Thin singular value decomposition m = u * diag(sigma) * vᵀ with
// sigma sorted descending. u is rows×k, v is cols×k, k = min(rows, cols).
struct Svd {
    Mat u;
    std::vector<double> sigma;
    Mat v;
};

// One-sided Jacobi SVD. Throws NumericalError if rotations fail to converge.
Svd svd(const Mat& m);

// Moore-Penrose pseudo-inverse via SVD. Singular values below
// rel_tol * sigma_max are treated as zero; rel_tol <= 0 selects the default
// max(rows, cols) * machine-epsilon.
Mat pinv(const Mat& m, double rel_tol = 0.0);

// Minimum-norm least-squares solution X minimizing ||aX - b||_F, via SVD.
Mat lstsq(const Mat& a, const Mat& b);

} // namespace fleximo
