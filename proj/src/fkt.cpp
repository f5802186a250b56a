#include "fleximo/fkt.hpp"

#include "json.hpp"

#include <cstring>
#include <fstream>

namespace fleximo {

namespace {

using nlohmann::json;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t take(const unsigned char* p, std::size_t n) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

} // namespace

std::size_t TensorData::count() const {
    std::size_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

TensorData TensorData::from_mat(const Mat& m) {
    TensorData t;
    t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data = m.data();
    return t;
}

TensorData TensorData::from_tensor4(const Tensor4& x) {
    TensorData t;
    t.dims = {static_cast<std::uint32_t>(x.dim(0)), static_cast<std::uint32_t>(x.dim(1)),
              static_cast<std::uint32_t>(x.dim(2)), static_cast<std::uint32_t>(x.dim(3))};
    t.data = x.data();
    return t;
}

TensorData TensorData::from_vector(const std::vector<double>& v) {
    TensorData t;
    t.dims = {static_cast<std::uint32_t>(v.size())};
    t.data = v;
    return t;
}

Mat TensorData::to_mat() const {
    if (dims.size() != 2) {
        throw FormatError("expected a rank-2 tensor, file holds rank " +
                          std::to_string(dims.size()));
    }
    return Mat(dims[0], dims[1], data);
}

Tensor4 TensorData::to_tensor4() const {
    if (dims.size() != 4) {
        throw FormatError("expected a rank-4 tensor, file holds rank " +
                          std::to_string(dims.size()));
    }
    return Tensor4({dims[0], dims[1], dims[2], dims[3]}, data);
}

bool SidecarMeta::empty() const {
    return !lambdas_um && !gsd_m && !patch_size && !semantics && provenance.empty();
}

std::string sidecar_path(const std::string& path) { return path + ".json"; }

void fkt_write(const std::string& path, const TensorData& tensor, const SidecarMeta* meta) {
    if (tensor.dims.empty() || tensor.dims.size() > 4) {
        throw FormatError("tensor rank must be 1..4, got " +
                          std::to_string(tensor.dims.size()));
    }
    if (tensor.dtype != kDtypeF32 && tensor.dtype != kDtypeF64) {
        throw FormatError("unknown dtype code " + std::to_string(tensor.dtype));
    }
    if (tensor.data.size() != tensor.count()) {
        throw DimensionError("tensor data length " + std::to_string(tensor.data.size()) +
                             " does not match dims product " +
                             std::to_string(tensor.count()));
    }

    std::string buf;
    buf.reserve(12 + 4 * tensor.dims.size() + tensor.data.size() * 8);
    buf += "FKT1";
    put_u16(buf, 1);
    buf.push_back(static_cast<char>(tensor.dtype));
    buf.push_back(static_cast<char>(tensor.dims.size()));
    for (std::uint32_t d : tensor.dims) put_u32(buf, d);
    if (tensor.dtype == kDtypeF64) {
        for (double v : tensor.data) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            put_u64(buf, bits);
        }
    } else {
        for (double v : tensor.data) {
            const float f = static_cast<float>(v);
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put_u32(buf, bits);
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("short write to '" + path + "'");
    out.close();

    if (meta && !meta->empty()) {
        json j;
        if (meta->lambdas_um) j["lambdas_um"] = *meta->lambdas_um;
        if (meta->gsd_m) j["gsd_m"] = *meta->gsd_m;
        if (meta->patch_size) j["patch_size"] = *meta->patch_size;
        if (meta->semantics) j["semantics"] = *meta->semantics;
        if (!meta->provenance.empty()) j["provenance"] = meta->provenance;
        std::ofstream side(sidecar_path(path), std::ios::trunc);
        if (!side) throw IoError("cannot open '" + sidecar_path(path) + "' for writing");
        side << j.dump(2) << "\n";
    }
}

TensorData fkt_read(const std::string& path, SidecarMeta* meta_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const unsigned char* p = reinterpret_cast<const unsigned char*>(raw.data());
    const std::size_t len = raw.size();

    if (len < 8) throw CorruptionError("file is only " + std::to_string(len) +
                                       " bytes, header needs 8");
    if (std::memcmp(p, "FKT1", 4) != 0) {
        throw FormatError("bad magic '" + raw.substr(0, 4) + "', expected 'FKT1'");
    }
    const std::uint16_t version = static_cast<std::uint16_t>(take(p + 4, 2));
    if (version != 1) throw FormatError("unsupported version " + std::to_string(version));
    const std::uint8_t dtype = p[6];
    if (dtype != kDtypeF32 && dtype != kDtypeF64) {
        throw FormatError("unknown dtype code " + std::to_string(dtype));
    }
    const std::uint8_t rank = p[7];
    if (rank < 1 || rank > 4) throw FormatError("rank must be 1..4, got " +
                                                std::to_string(rank));
    const std::size_t header = 8 + 4 * static_cast<std::size_t>(rank);
    if (len < header) {
        throw CorruptionError("file is " + std::to_string(len) + " bytes, header needs " +
                              std::to_string(header));
    }

    TensorData t;
    t.dtype = dtype;
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        const std::uint32_t d = static_cast<std::uint32_t>(take(p + 8 + 4 * i, 4));
        if (d == 0) throw FormatError("dimension " + std::to_string(i) + " is zero");
        t.dims.push_back(d);
        n *= d;
    }
    const std::size_t value_size = dtype == kDtypeF64 ? 8 : 4;
    const std::uint64_t expect = n * value_size;
    const std::uint64_t have = len - header;
    if (have != expect) {
        throw CorruptionError("payload is " + std::to_string(have) +
                              " bytes, expected " + std::to_string(expect));
    }

    t.data.resize(n);
    const unsigned char* payload = p + header;
    if (dtype == kDtypeF64) {
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::uint64_t bits = take(payload + 8 * i, 8);
            double v;
            std::memcpy(&v, &bits, 8);
            t.data[i] = v;
        }
    } else {
        for (std::uint64_t i = 0; i < n; ++i) {
            const std::uint32_t bits = static_cast<std::uint32_t>(take(payload + 4 * i, 4));
            float f;
            std::memcpy(&f, &bits, 4);
            t.data[i] = f;
        }
    }

    if (meta_out) {
        *meta_out = SidecarMeta{};
        std::ifstream side(sidecar_path(path));
        if (side) {
            json j;
            try {
                side >> j;
            } catch (const json::exception& e) {
                throw FormatError("sidecar '" + sidecar_path(path) +
                                  "' is not valid JSON: " + e.what());
            }
            try {
                if (j.contains("lambdas_um"))
                    meta_out->lambdas_um = j["lambdas_um"].get<std::vector<double>>();
                if (j.contains("gsd_m")) meta_out->gsd_m = j["gsd_m"].get<double>();
                if (j.contains("patch_size"))
                    meta_out->patch_size = j["patch_size"].get<int>();
                if (j.contains("semantics"))
                    meta_out->semantics = j["semantics"].get<std::string>();
                if (j.contains("provenance"))
                    meta_out->provenance =
                        j["provenance"].get<std::map<std::string, std::string>>();
            } catch (const json::exception& e) {
                throw FormatError("sidecar '" + sidecar_path(path) +
                                  "' has a mistyped field: " + e.what());
            }
        }
    }
    return t;
}

} // namespace fleximo
