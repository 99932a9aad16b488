#ifndef PVLAB_UTIL_HPP
#define PVLAB_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <string_view>

namespace pvlab {

/// Neumaier-compensated accumulator. Addition order is whatever the caller
/// does; the compensation makes sums of exactly cancelling term multisets
/// come out as exact zeros, which the antisymmetry identities rely on.
class Accumulator {
 public:
  explicit Accumulator(bool compensated = true) : compensated_(compensated) {}

  void add(double v) {
    if (!compensated_) {
      sum_ += v;
      return;
    }
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return compensated_ ? sum_ + comp_ : sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  bool compensated_;
};

/// Evaluation switches threaded through the operator entry points.
struct EvalOptions {
  bool compensated = true;
  bool override_trust_floor = false;
};

// Deterministic random helpers. mt19937_64's output sequence is pinned by
// the standard; std::uniform_*_distribution is not, so we roll our own.
inline std::uint64_t bounded_uint(std::mt19937_64& rng, std::uint64_t n) {
  // rejection sampling, no modulo bias
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x > limit);
  return x % n;
}

inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_double(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_double(rng);
}

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// 17 significant digits: enough to round-trip any finite double.
inline std::string format_g17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pvlab

#endif
