#ifndef VSR_RNG_HPP
#define VSR_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace vsr {

// xoshiro256++ with splitmix64 seeding. Self-contained so that seeded runs
// are bit-reproducible across standard library implementations (the std::
// distributions are not). State is trivially serializable for checkpoints.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      // splitmix64
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      s = z ^ (z >> 31);
    }
    has_cached_gauss_ = false;
    cached_gauss_ = 0.0;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [lo,hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased integer in [0,n)
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

  // standard normal via Box-Muller (deterministic, caches the second draw)
  double gauss() {
    if (has_cached_gauss_) {
      has_cached_gauss_ = false;
      return cached_gauss_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_gauss_ = r * std::sin(a);
    has_cached_gauss_ = true;
    return r * std::cos(a);
  }

  double gauss(double mean, double sigma) { return mean + sigma * gauss(); }

  // in-place Fisher-Yates; std::shuffle is implementation-defined
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // checkpoint serialization: 4 state words + gaussian cache
  std::array<std::uint64_t, 4> state() const { return state_; }
  bool has_cached_gauss() const { return has_cached_gauss_; }
  double cached_gauss() const { return cached_gauss_; }
  void restore(const std::array<std::uint64_t, 4>& s, bool has_cached, double cached) {
    state_ = s;
    has_cached_gauss_ = has_cached;
    cached_gauss_ = cached;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  bool has_cached_gauss_ = false;
  double cached_gauss_ = 0.0;
};

}  // namespace vsr

#endif  // VSR_RNG_HPP
