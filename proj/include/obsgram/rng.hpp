#pragma once

#include <cstdint>
#include <random>

namespace obsgram {

/// One round of the splitmix64 output mix (a bijection on 64-bit values).
std::uint64_t splitmix64_mix(std::uint64_t x);

/// Collision-free child seed for stream `index` of a base seed. Distinct
/// indices under the same base give statistically independent streams.
std::uint64_t derive_stream_seed(std::uint64_t base, std::uint64_t index);

/// Seeded stream of uniforms and standard normals. Normals come from an
/// explicit Box-Muller transform over the 53-bit uniform output of
/// mt19937_64, so draws are identical across standard libraries (the
/// distribution adapters in <random> are implementation-defined).
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    /// Standard normal draw.
    double normal();

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace obsgram
