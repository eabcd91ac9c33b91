#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace aligngroup {

// Deterministic RNG with hand-rolled distributions. std::*_distribution is
// implementation-defined, which would break cross-platform reproducibility
// of initialization and sampling; the raw mt19937_64 stream is portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), base_seed_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of entropy.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller; one cached value.
  double normal(double mean, double stddev) {
    if (has_cached_) {
      has_cached_ = false;
      return mean + stddev * cached_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return mean + stddev * r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  // A child RNG whose stream is a pure function of (this seed path, tag).
  Rng derive(std::uint64_t tag) const {
    std::uint64_t x = base_seed_ ^ (tag * 0x9e3779b97f4a7c15ULL);
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x = x ^ (x >> 31);
    return Rng(x);
  }

  std::string serialize_state() const {
    std::ostringstream os;
    os << engine_ << ' ' << (has_cached_ ? 1 : 0) << ' ' << cached_ << ' '
       << base_seed_;
    return os.str();
  }

  void restore_state(const std::string& s) {
    std::istringstream is(s);
    int flag = 0;
    is >> engine_ >> flag >> cached_ >> base_seed_;
    has_cached_ = flag != 0;
  }

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
  std::uint64_t base_seed_ = 0;
};

}  // namespace aligngroup
