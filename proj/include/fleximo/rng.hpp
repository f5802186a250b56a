#pragma once

#include <cstdint>
#include <vector>

namespace fleximo {

// Deterministic 64-bit generator: splitmix64 stream feeding Box-Muller for
// normal draws. Identical seed gives an identical sequence. Single-owner by
// design: callers derive independent child streams via split() instead of
// sharing one Rng across threads.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t next_u64();

    // Uniform draw in [0, 1) with 53 significant bits.
    double uniform();

    // Standard-normal draw via Box-Muller; the second value of each
    // generated pair is cached and returned on the following call.
    double normal();

    // n standard-normal draws; n = 0 yields an empty vector.
    std::vector<double> normals(std::size_t n);

    // Child generator for stream index `stream`, derived from the original
    // seed (not the current state), so splits commute with draws.
    Rng split(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fleximo
