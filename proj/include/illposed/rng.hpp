#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace illposed {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Whitened seed for stream `index` of a master seed. Streams are independent
/// of how many siblings exist and of the order in which they are drawn.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t state = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  std::uint64_t a = splitmix64(state);
  std::uint64_t b = splitmix64(state);
  return a ^ (b << 1);
}

inline std::mt19937_64 substream(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = derive_seed(master, index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

/// N(0,1) sampler via Box-Muller on explicit 53-bit uniforms. The draw
/// sequence is a pure function of the engine state; std::normal_distribution
/// is implementation-defined and would break cross-toolchain reproducibility.
class GaussianSampler {
public:
  explicit GaussianSampler(std::mt19937_64 engine) : eng_(std::move(engine)) {}
  GaussianSampler(std::uint64_t master, std::uint64_t index) : eng_(substream(master, index)) {}

  // uniform on (0, 1]
  double uniform() { return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53; }

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * 3.14159265358979323846 * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  double rademacher() { return (eng_() & 1u) ? 1.0 : -1.0; }

  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace illposed
