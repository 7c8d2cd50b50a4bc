#pragma once

#include <cmath>
#include <cstdint>

namespace rbm {

/// Identifies one Brownian driver: (seed, stream) -> independent increment
/// stream. Distinct streams are independent; the map
/// (seed, stream, step, component) -> N(0,1) is a pure function, so ensembles
/// are reproducible regardless of execution order or thread count.
struct RandomSource {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RandomSource with_stream(std::uint64_t s) const { return RandomSource{seed, s}; }
  /// Derive an unrelated substream family (e.g. perturbed ensembles, probe
  /// points) by salting the high stream bits.
  RandomSource salted(std::uint64_t salt) const {
    return RandomSource{seed ^ (0x9E3779B97F4A7C15ull * (salt + 1)), stream};
  }
};

namespace detail {

struct Philox4x32 {
  // Philox4x32-10 round constants (Salmon et al.).
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static inline void round(std::uint32_t& c0, std::uint32_t& c1, std::uint32_t& c2,
                           std::uint32_t& c3, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
  }

  static inline void block(std::uint32_t ctr[4], std::uint32_t k0, std::uint32_t k1,
                           std::uint32_t out[4]) {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    for (int r = 0; r < 10; ++r) {
      round(c0, c1, c2, c3, k0, k1);
      k0 += kW0;
      k1 += kW1;
    }
    out[0] = c0;
    out[1] = c1;
    out[2] = c2;
    out[3] = c3;
  }
};

// 53-bit uniform in (0,1) from two 32-bit words.
inline double uniform_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-64;
}

}  // namespace detail

/// Stateless Gaussian stream: normal(step, comp) is a pure function of
/// (seed, stream, step, comp). Pairs of components share one Philox block
/// through Box-Muller, so consecutive components are cheap.
class GaussianStream {
 public:
  explicit GaussianStream(RandomSource src) : src_(src) {}

  /// Both Box-Muller outputs for pair index `pair` at step `step`.
  void normal_pair(std::uint32_t step, std::uint32_t pair, double& z0, double& z1) const {
    std::uint32_t ctr[4] = {static_cast<std::uint32_t>(src_.stream),
                            static_cast<std::uint32_t>(src_.stream >> 32), step, pair};
    std::uint32_t out[4];
    detail::Philox4x32::block(ctr, static_cast<std::uint32_t>(src_.seed),
                              static_cast<std::uint32_t>(src_.seed >> 32), out);
    const double u1 = detail::uniform_open(out[0], out[1]);
    const double u2 = detail::uniform_open(out[2], out[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 6.283185307179586476925286766559 * u2;
    z0 = r * std::cos(th);
    z1 = r * std::sin(th);
  }

  double normal(std::uint32_t step, std::uint32_t comp) const {
    double z0, z1;
    normal_pair(step, comp >> 1, z0, z1);
    return (comp & 1u) ? z1 : z0;
  }

  /// Two uniforms in (0,1) from an independent counter slot (used e.g. for
  /// bridge-crossing sampling; keep `pair` disjoint from the Gaussian pairs).
  void uniform_pair(std::uint32_t step, std::uint32_t pair, double& u0, double& u1) const {
    std::uint32_t ctr[4] = {static_cast<std::uint32_t>(src_.stream),
                            static_cast<std::uint32_t>(src_.stream >> 32), step, pair};
    std::uint32_t out[4];
    detail::Philox4x32::block(ctr, static_cast<std::uint32_t>(src_.seed),
                              static_cast<std::uint32_t>(src_.seed >> 32), out);
    u0 = detail::uniform_open(out[0], out[1]);
    u1 = detail::uniform_open(out[2], out[3]);
  }

  const RandomSource& source() const { return src_; }

 private:
  RandomSource src_;
};

}  // namespace rbm
