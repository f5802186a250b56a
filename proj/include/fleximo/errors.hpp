#pragma once

#include <stdexcept>
#include <string>

namespace fleximo {

// Base error carrying a stable machine-readable class tag. The CLI maps
// these to exit code 1 and a JSON object {"error":{"class":...,"message":...}}
// on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(msg), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

// Incompatible matrix/tensor shapes.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error("dimension", msg) {}
};

// Invalid configuration parameter (odd embedding width, zero heads, ...).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("configuration", msg) {}
};

// Image channel count does not match the kernel's wavelength channels.
class SpectralMismatchError : public Error {
public:
    explicit SpectralMismatchError(const std::string& msg)
        : Error("spectral_mismatch", msg) {}
};

// Image dimensions not divisible by the patch size.
class TilingError : public Error {
public:
    explicit TilingError(const std::string& msg) : Error("tiling", msg) {}
};

// Positional-embedding grid does not line up with the token grid.
class AlignmentError : public Error {
public:
    explicit AlignmentError(const std::string& msg) : Error("alignment", msg) {}
};

// Malformed file contents (bad magic, unknown version/dtype, bad JSON).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error("format", msg) {}
};

// Structurally valid header but payload does not match the declared size.
class CorruptionError : public Error {
public:
    explicit CorruptionError(const std::string& msg) : Error("corruption", msg) {}
};

// Numerical failure (SVD non-convergence, non-finite values).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error("numerical", msg) {}
};

// Filesystem failure (unreadable or unwritable path).
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("io", msg) {}
};

} // namespace fleximo
