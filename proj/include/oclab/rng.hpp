#ifndef OCLAB_RNG_HPP
#define OCLAB_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace oclab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic pseudo-random stream. Streams derived from (seed, a, b) are
// independent for distinct (a, b), so parallel trials reproduce bit-identically
// for any thread count. All sampling primitives are implemented here rather
// than via std:: distributions, whose output is not pinned by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s = h ^ (0x9e3779b97f4a7c15ULL * (a + 1));
    h = splitmix64(s);
    s = h ^ (0xc2b2ae3d27d4eb4fULL * (b + 1));
    return splitmix64(s);
  }

  static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return Rng(mix(seed, a, b));
  }

  std::uint64_t u64() { return eng_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), rejection sampled.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r = u64();
    while (r >= bound) r = u64();
    return static_cast<std::size_t>(r % n);
  }

  // Index drawn from nonnegative weights (need not be normalized).
  std::size_t categorical(const double* w, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += w[i];
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    for (std::size_t i = n; i-- > 0;) {
      if (w[i] > 0.0) return i;
    }
    return n - 1;
  }

  std::size_t categorical(const std::vector<double>& w) {
    return categorical(w.data(), w.size());
  }

  // Standard normal via Box-Muller; two uniforms per draw, no cached spare.
  double gaussian() {
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace oclab

#endif  // OCLAB_RNG_HPP
