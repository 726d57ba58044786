#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "dsim/distribution.hpp"
#include "dsim/rng.hpp"

namespace dsim {

/// Raised when a protocol asks for more players than the source can seat.
class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The players' side of a protocol: one private sample per player, handed
/// out in player order. The unknown distribution stays behind this interface.
class SampleSource {
 public:
  virtual ~SampleSource() = default;

  virtual std::size_t alphabet_size() const = 0;
  /// Samples still available; max() for unbounded sources.
  virtual std::size_t remaining() const = 0;
  /// Fills `out` with the next out.size() samples, or throws
  /// InsufficientSamples without consuming anything.
  virtual void fill(std::span<Symbol> out) = 0;

  Symbol draw() {
    Symbol s;
    fill(std::span<Symbol>(&s, 1));
    return s;
  }
  std::vector<Symbol> take(std::size_t n) {
    std::vector<Symbol> out(n);
    fill(out);
    return out;
  }
};

/// i.i.d. draws from a known distribution, optionally capped at `budget`.
class DistributionSource final : public SampleSource {
 public:
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  DistributionSource(const Distribution& p, RngStream rng,
                     std::size_t budget = kUnbounded)
      : k_(p.size()), sampler_(p), rng_(std::move(rng)), remaining_(budget) {}

  std::size_t alphabet_size() const override { return k_; }
  std::size_t remaining() const override { return remaining_; }
  void fill(std::span<Symbol> out) override;

 private:
  std::size_t k_;
  Sampler sampler_;
  RngStream rng_;
  std::size_t remaining_;
};

/// Replays a fixed sequence.
class SequenceSource final : public SampleSource {
 public:
  SequenceSource(std::vector<Symbol> samples, std::size_t k);

  std::size_t alphabet_size() const override { return k_; }
  std::size_t remaining() const override { return samples_.size() - pos_; }
  void fill(std::span<Symbol> out) override;

 private:
  std::vector<Symbol> samples_;
  std::size_t k_;
  std::size_t pos_ = 0;
};

}  // namespace dsim
