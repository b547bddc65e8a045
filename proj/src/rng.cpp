#include "obsgram/rng.hpp"

#include <cmath>
#include <numbers>

namespace obsgram {

std::uint64_t splitmix64_mix(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t base, std::uint64_t index) {
    // Advance the base by (index + 1) golden-ratio increments, then apply the
    // mix twice. The pre-mix values are distinct per index, and the mix is a
    // bijection, so child seeds never collide for a fixed base.
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    return splitmix64_mix(splitmix64_mix(z));
}

double GaussianStream::uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double GaussianStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; 1 - uniform01() lies in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

}  // namespace obsgram
