#include "fleximo/rng.hpp"

#include <cmath>

namespace fleximo {

namespace {
// splitmix64 finalizer (Steele, Lea & Flood); also used to derive child seeds.
std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace

std::uint64_t Rng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
}

double Rng::uniform() {
    // Top 53 bits scaled into [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 is shifted into (0, 1] so log(u1) stays finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::vector<double> Rng::normals(std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = normal();
    return out;
}

Rng Rng::split(std::uint64_t stream) const {
    return Rng(mix(seed_ ^ mix(stream + 0x632be59bd9b4e019ULL)));
}

} // namespace fleximo
