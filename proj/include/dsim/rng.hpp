#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace dsim {

/// SplitMix64 finalizer. Used only to derive stream seeds, never as a generator.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of the stream `stream_id` under `master_seed`:
///   derive(master, id) = mix64(master ^ mix64(id))
constexpr std::uint64_t derive_seed(std::uint64_t master_seed,
                                    std::uint64_t stream_id) noexcept {
  return mix64(master_seed ^ mix64(stream_id));
}

/// A reproducible random stream identified by (master_seed, stream_id).
///
/// The underlying engine is std::mt19937_64 seeded with derive_seed(). The
/// same pair always yields the same sequence; child() derives independent
/// sub-streams (per trial, per player, per block) without touching the
/// parent's state, so results do not depend on the order in which children
/// are consumed.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed),
        stream_id_(stream_id),
        engine_(derive_seed(master_seed, stream_id)) {}

  /// Stream `id` below this one: RngStream(derive_seed(master, stream), id).
  RngStream child(std::uint64_t id) const {
    return RngStream(derive_seed(master_seed_, stream_id_), id);
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace dsim
