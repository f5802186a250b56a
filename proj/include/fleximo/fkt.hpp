#pragma once

#include "fleximo/mat.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fleximo {

// Binary tensor container:
//   magic "FKT1" | version u16 LE (=1) | dtype u8 (1=f32, 2=f64) |
//   rank u8 (1..4) | dims rank x u32 LE | payload row-major LE
// A JSON sidecar at <path>.json carries optional metadata.

enum : std::uint8_t { kDtypeF32 = 1, kDtypeF64 = 2 };

struct TensorData {
    std::uint8_t dtype = kDtypeF64;
    std::vector<std::uint32_t> dims; // rank 1..4
    std::vector<double> data;        // always held as f64 in memory

    std::size_t count() const;
    static TensorData from_mat(const Mat& m);
    static TensorData from_tensor4(const Tensor4& t);
    static TensorData from_vector(const std::vector<double>& v);
    Mat to_mat() const;       // rank must be 2
    Tensor4 to_tensor4() const; // rank must be 4
};

struct SidecarMeta {
    std::optional<std::vector<double>> lambdas_um;
    std::optional<double> gsd_m;
    std::optional<int> patch_size;
    std::optional<std::string> semantics;
    std::map<std::string, std::string> provenance;

    bool empty() const;
};

// Writes the tensor; a sidecar is written iff meta is non-null and non-empty.
void fkt_write(const std::string& path, const TensorData& tensor,
               const SidecarMeta* meta = nullptr);

// Reads a tensor; fills meta_out from the sidecar when present.
TensorData fkt_read(const std::string& path, SidecarMeta* meta_out = nullptr);

std::string sidecar_path(const std::string& path);

} // namespace fleximo
