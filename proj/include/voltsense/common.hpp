#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsp {

enum class ErrorCode {
  parse = 1,
  validation = 2,
  numeric = 3,
  infeasible = 4,
  io = 5,
  usage = 6,
};

// Domain error carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

// Counter-mode splitmix64. Every draw is a pure function of (seed, index),
// so sample sets are bit-reproducible regardless of worker partitioning.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t index) const {
    std::uint64_t z = seed_ + (index + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform(std::uint64_t index) const {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi]; degenerate intervals return lo.
  double uniform(std::uint64_t index, double lo, double hi) const {
    return lo + (hi - lo) * uniform(index);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads. jobs <= 1 runs inline.
// Work is claimed by atomic index so results must not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int jobs);

int default_jobs();

// SHA-1 as a hex string; used to fingerprint input files in artifacts.
std::string sha1_hex(const std::string& data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& data);

// Shortest round-trip decimal for doubles (deterministic artifact output).
std::string format_double(double v);

}  // namespace vsp
