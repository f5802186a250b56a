#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fleximo/errors.hpp"

namespace fleximo {

// Dense row-major matrix of 64-bit floats. All public operations keep
// entries finite; constructors taking data validate that up front.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Mat identity(std::size_t n);

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Dense row-major rank-4 tensor; axis meaning is contextual
// (kernels are [out_dim, channels, patch, patch]).
class Tensor4 {
public:
    Tensor4() : dims_{0, 0, 0, 0} {}
    Tensor4(std::size_t d0, std::size_t d1, std::size_t d2, std::size_t d3)
        : dims_{d0, d1, d2, d3}, data_(d0 * d1 * d2 * d3, 0.0) {}
    Tensor4(std::array<std::size_t, 4> dims, std::vector<double> data);

    double& operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
        return data_[((a * dims_[1] + b) * dims_[2] + c) * dims_[3] + d];
    }
    double operator()(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
        return data_[((a * dims_[1] + b) * dims_[2] + c) * dims_[3] + d];
    }

    const std::array<std::size_t, 4>& dims() const { return dims_; }
    std::size_t dim(std::size_t i) const { return dims_[i]; }
    std::size_t size() const { return data_.size(); }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::array<std::size_t, 4> dims_;
    std::vector<double> data_;
};

// Throws NumericalError if any entry is NaN or infinite.
void ensure_finite(const std::vector<double>& values, const char* what);
void ensure_finite(const Mat& m, const char* what);

Mat transpose(const Mat& m);
double max_abs(const Mat& m);
double max_abs_diff(const Mat& a, const Mat& b);

} // namespace fleximo
