#pragma once

// Seedable random streams. A (seed, stream_id) pair fully determines the
// sequence; std::mt19937_64 and std::seed_seq are specified bit-exactly by the
// standard, and the uniform/normal transforms below avoid the
// implementation-defined std:: distributions.

#include <cmath>
#include <cstdint>
#include <random>

namespace hyperstat {

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// A child stream; used for per-purpose and per-shard substreams.
  [[nodiscard]] RngStream substream(std::uint64_t index) const {
    // splitmix64 finalizer keeps nested substreams from colliding with siblings
    std::uint64_t z = stream_id + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return {seed, z};
  }

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// Named purposes so that e.g. adding estimation shards never perturbs the pilot sample.
enum class StreamPurpose : std::uint64_t { sampling = 1, pilot = 2, estimation = 3, init = 4, mixture = 5 };

[[nodiscard]] inline RngStream purpose_stream(std::uint64_t seed, StreamPurpose p) {
  return RngStream{seed, static_cast<std::uint64_t>(p)};
}

class Rng {
 public:
  explicit Rng(const RngStream& s) {
    std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                      static_cast<std::uint32_t>(s.stream_id), static_cast<std::uint32_t>(s.stream_id >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by the Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// Index in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hyperstat
