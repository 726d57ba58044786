#pragma once

// Distributed simulation: referee-side rejection sampling that turns l-bit
// messages from players into an exact sample of the players' distribution,
// or an abort.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dsim/distribution.hpp"
#include "dsim/rng.hpp"
#include "dsim/smp.hpp"

namespace dsim::sim {

using smp::SimulationOutcome;

/// Contiguous partition of [k] into m = ceil(k / (2^l - 1)) parts. Symbol x
/// sits in part x / (2^l - 1) and is announced by the nonzero code
/// 1 + x % (2^l - 1); the all-zero word means "not in my part".
class BlockLayout {
 public:
  BlockLayout(std::size_t k, unsigned bits);

  std::size_t alphabet_size() const noexcept { return k_; }
  unsigned bits() const noexcept { return bits_; }
  std::size_t parts() const noexcept { return parts_; }
  std::size_t part_capacity() const noexcept { return capacity_; }

  std::size_t part_of(Symbol x) const { return x / capacity_; }
  std::size_t part_size(std::size_t j) const;
  std::uint64_t code_of(Symbol x) const { return 1 + x % capacity_; }
  /// Symbol announced by `code` in part j; code must be valid for that part.
  Symbol decode(std::size_t part, std::uint64_t code) const;

  /// The word a player assigned to `part` sends after observing x.
  std::uint64_t encode(std::size_t part, Symbol x) const {
    return part_of(x) == part ? code_of(x) : 0;
  }

  /// Symbols of part j.
  std::vector<Symbol> part_members(std::size_t j) const;
  /// p(S_j) for every part.
  std::vector<double> part_masses(const Distribution& p) const;

 private:
  std::size_t k_;
  unsigned bits_;
  std::size_t capacity_;
  std::size_t parts_;
};

struct SimulationReport {
  SimulationOutcome outcome = SimulationOutcome::abort();
  std::size_t players_used = 0;
  std::size_t groups_used = 0;
};

// --- Player side ---------------------------------------------------------

/// Players of the basic protocol: 2k one-bit players, players 2i and 2i+1
/// (0-based) both report [x == i].
smp::ProtocolSpec basic_protocol(std::size_t k);

/// Players of the block protocol: 4m players; players 2j, 2j+1, 2(j+m),
/// 2(j+m)+1 (0-based) all announce membership in part j. With l = 1 this is
/// the enhanced one-bit protocol (two copies of the basic one).
smp::ProtocolSpec block_protocol(const BlockLayout& layout);

/// Part served by 0-based player `t` of block_protocol.
inline std::size_t block_player_part(const BlockLayout& layout, std::size_t t) {
  return (t / 2) % layout.parts();
}

// --- Referee side --------------------------------------------------------

/// Accept iff exactly one even-indexed (0-based) message is nonzero and its
/// odd partner is zero; the accepted pair's index q gives the part q mod m.
SimulationOutcome decode_pairs(std::span<const std::uint64_t> messages,
                               const BlockLayout& layout);

/// Flip kernel: every nonzero word becomes zero with probability 1/2.
smp::MessageLaw flip_kernel(std::size_t player, std::uint64_t message);

/// Referee flips each nonzero message to zero with probability 1/2, one
/// random bit per message drawn from `g` (bit set => flipped).
template <class Urbg>
void referee_flip(std::span<std::uint64_t> messages, Urbg& g) {
  std::uint64_t pool = 0;
  unsigned left = 0;
  for (auto& m : messages) {
    if (m == 0) continue;
    if (left == 0) {
      pool = static_cast<std::uint64_t>(g());
      left = 64;
    }
    if (pool & 1) m = 0;
    pool >>= 1;
    --left;
  }
}

/// One block of the l-bit protocol on the given 4m samples.
template <class Urbg>
SimulationOutcome run_block(const BlockLayout& layout,
                            std::span<const Symbol> samples, Urbg& referee,
                            std::vector<std::uint64_t>& scratch) {
  const std::size_t n = 4 * layout.parts();
  scratch.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    scratch[t] = layout.encode(block_player_part(layout, t), samples[t]);
  }
  referee_flip(std::span<std::uint64_t>(scratch), referee);
  return decode_pairs(scratch, layout);
}

// --- Protocols -----------------------------------------------------------

/// Basic one-bit protocol on 2k fresh players.
SimulationOutcome basic_sim_1bit(const Distribution& p, RngStream& rng);
/// Enhanced one-bit protocol on 4k fresh players.
SimulationOutcome enhanced_sim_1bit(const Distribution& p, RngStream& rng);
/// l-bit block protocol on 4m fresh players.
SimulationOutcome block_sim(const Distribution& p, const BlockLayout& layout,
                            RngStream& rng);

/// Groups needed for abort probability below alpha: 10 * ceil(log2(1/alpha)).
std::size_t boost_groups(double alpha);
/// Players used by full_sim: 40 * ceil(log2(1/alpha)) * ceil(k / (2^l - 1)),
/// or 1 when l >= ceil(log2 k) (the sample is sent verbatim).
std::size_t full_sim_players(std::size_t k, unsigned bits, double alpha);

/// Boosted protocol: runs block_sim on independent groups (group g uses
/// rng.child(g)) and returns the first non-abort outcome by group index.
SimulationReport full_sim(const Distribution& p, unsigned bits, double alpha,
                          RngStream& rng);

/// Exact referee output law from transcript enumeration: output[i] is the
/// probability of emitting symbol i, success the probability of not aborting.
struct ExactLaw {
  std::vector<double> output;
  double success = 0.0;
  /// output / success; throws std::domain_error when success is 0.
  std::vector<double> conditional() const;
};
ExactLaw exact_basic_law(const Distribution& p,
                         std::uint64_t cap = smp::kDefaultEnumerationCap);
ExactLaw exact_block_law(const Distribution& p, const BlockLayout& layout,
                         std::uint64_t cap = smp::kDefaultEnumerationCap);

/// prod_j (1 - p_j): acceptance probability of the basic protocol.
double basic_success_prob(const Distribution& p);
/// prod_j (1 - p(S_j)/2)^2: acceptance probability of one block.
double success_prob_exact(const Distribution& p, const BlockLayout& layout);

}  // namespace dsim::sim
