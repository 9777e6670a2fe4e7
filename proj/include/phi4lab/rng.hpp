#pragma once

#include <cstdint>
#include <random>

namespace phi4lab {

// Deterministic RNG with explicitly coded output maps (no library
// distributions, so streams are reproducible bit-for-bit everywhere).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }
    // uniform on [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    // standard normal via Box-Muller (cached spare)
    double gaussian();
    int uniform_int(int lo, int hi);  // inclusive bounds

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64-style mix; derive independent stream seeds from a root seed
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t salt);

}  // namespace phi4lab
