#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rlminer {

// Seeded generator with hand-rolled distributions. std::*_distribution output
// is implementation-defined, so every draw here is spelled out to keep runs
// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double real01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n); rejection sampling keeps it exactly uniform.
  std::size_t index(std::size_t n) {
    if (n == 0) throw std::logic_error("Rng::index: n == 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  bool bernoulli(double p) { return real01() < p; }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u;
    do {
      u = real01();
    } while (u <= 0.0);
    const double v = real01();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * v);
    has_spare_ = true;
    return r * std::cos(two_pi * v);
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << double_bits(spare_);
    return os.str();
  }

  static Rng deserialize(const std::string& s) {
    Rng rng(0);
    std::istringstream is(s);
    int spare_flag = 0;
    std::uint64_t spare_bits = 0;
    is >> rng.engine_ >> spare_flag >> spare_bits;
    if (!is) throw std::runtime_error("Rng::deserialize: malformed state");
    rng.has_spare_ = spare_flag != 0;
    rng.spare_ = bits_double(spare_bits);
    return rng;
  }

 private:
  static std::uint64_t double_bits(double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, sizeof u);
    return u;
  }
  static double bits_double(std::uint64_t u) {
    double d;
    std::memcpy(&d, &u, sizeof d);
    return d;
  }

  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rlminer
