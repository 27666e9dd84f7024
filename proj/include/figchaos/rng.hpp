#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace figchaos
{

/// splitmix64 step, used to derive well-separated seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t &state)
{
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic (base seed, model index, replicate index) -> seed mapping.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t model,
                                 std::uint64_t replicate)
{
    std::uint64_t s = base;
    splitmix64(s);
    s ^= 0x632be59bd9b4e019ULL * (model + 1);
    splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL * (replicate + 1);
    return splitmix64(s);
}

/// Standard normal generator: mt19937_64 stream mapped through the
/// Marsaglia polar transform. Implemented by hand (rather than
/// std::normal_distribution) so the draw sequence is identical across
/// standard libraries.
class GaussianRng {
  public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double factor = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * factor;
        has_spare_ = true;
        return u * factor;
    }

    std::mt19937_64 &engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace figchaos
