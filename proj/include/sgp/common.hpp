#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sgp {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// ============================================================================
// Error hierarchy. Everything thrown by the library derives from sgp::Error so
// callers (notably the CLI) can map categories to exit codes.
// ============================================================================

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed call: dimension mismatch, non-finite input, bad parameter value.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// A structurally valid request that cannot be served (e.g. planner endpoints
// in collision). Distinct from a planning failure, which is a result.
class InvalidRequestError : public Error {
 public:
  using Error::Error;
};

// Fixed-capacity encoding overflow (obstacle count > K_max).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Value outside a mathematical domain (quantile p outside (0,1), nonpositive
// sample under a log-normal fit).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A callee-side contract was violated (e.g. smoothing handed an invalid path).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Dataset generation gave up (rejection cap exceeded, infeasible world).
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Malformed persisted data; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit ParseError(const std::string& msg) : Error(msg), line_(0) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ModelMissingError : public Error {
 public:
  using Error::Error;
};

// ============================================================================
// Deterministic RNG. Self-contained xoshiro256++ so that streams are
// bit-reproducible across platforms and standard libraries; std::*_distribution
// is deliberately avoided everywhere.
// ============================================================================

// splitmix64 finalizer; also used to stretch seeds and derive substreams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable per-task seed derivation: one master seed fans out to independent
// streams keyed by up to three indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = mix64(master ^ 0x6c62272e07bb0142ULL);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) {
      s += 0x9e3779b97f4a7c15ULL;
      word = mix64(s);
    }
  }

  std::uint64_t next_u64() {
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

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform in [0, n). Rejection keeps it unbiased.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw InvalidArgumentError("uniform_index: n must be positive");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<std::size_t>(x % bound);
  }

  // Standard normal via Box-Muller; second value cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sgp
