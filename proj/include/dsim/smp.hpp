#pragma once

// Simultaneous message passing: n players each hold one sample, each sends a
// single l-bit message to a referee, and nobody talks to anybody else.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dsim/distribution.hpp"
#include "dsim/rng.hpp"

namespace dsim::smp {

/// Longest message supported; messages are packed into one 64-bit word.
inline constexpr unsigned kMaxMessageBits = 64;

/// Default cap on the number of atoms an exact enumeration may visit.
inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

/// An l-bit message. Bit i of `bits` is the i-th transmitted bit.
struct Message {
  std::uint64_t bits = 0;
  unsigned length = 0;

  bool is_zero() const noexcept { return bits == 0; }
  /// Big-endian hex rendering, ceil(length / 4) digits.
  std::string to_hex() const;
  bool operator==(const Message&) const = default;
};

enum class RandomnessMode { private_coin, public_coin };

/// Shared randomness realization: words every player (and the referee) sees.
using PublicRealization = std::vector<std::uint64_t>;

/// Channel that is a deterministic function of the player index, its sample
/// and the shared realization (empty in private-coin mode).
using DeterministicChannel = std::function<std::uint64_t(
    std::size_t player, Symbol sample, std::span<const std::uint64_t> shared)>;

/// Channel that may also use the player's own private stream.
using RandomizedChannel = std::function<std::uint64_t(
    std::size_t player, Symbol sample, std::span<const std::uint64_t> shared,
    RngStream& own)>;

struct ProtocolSpec {
  std::size_t players = 0;
  unsigned bits = 1;
  RandomnessMode mode = RandomnessMode::private_coin;
  /// Number of 64-bit words of shared randomness drawn per run (public mode).
  std::size_t public_words = 0;
  std::variant<DeterministicChannel, RandomizedChannel> channel;

  bool deterministic() const {
    return std::holds_alternative<DeterministicChannel>(channel);
  }
  /// Throws std::invalid_argument when the spec is not well formed.
  void validate() const;
};

struct Transcript {
  std::vector<Message> messages;
  PublicRealization public_realization;

  std::vector<std::uint64_t> words() const;
  /// {"messages": ["hex", ...], "public": [...]}.
  std::string to_json() const;
};

/// A symbol of [k] or the abort symbol.
class SimulationOutcome {
 public:
  static SimulationOutcome abort() { return SimulationOutcome(); }
  static SimulationOutcome symbol(Symbol s) { return SimulationOutcome(s); }

  bool aborted() const noexcept { return !value_.has_value(); }
  Symbol value() const { return value_.value(); }
  bool operator==(const SimulationOutcome&) const = default;

 private:
  SimulationOutcome() = default;
  explicit SimulationOutcome(Symbol s) : value_(s) {}
  std::optional<Symbol> value_;
};

/// Draws one sample per player from p and runs the channels. Private streams
/// are rng.child(1 + player); the shared realization comes from rng.child(0).
Transcript run_protocol(const ProtocolSpec& spec, const Distribution& p,
                        RngStream& rng);
/// Same, with the players' samples supplied by the caller.
Transcript run_protocol_on_samples(const ProtocolSpec& spec,
                                   std::span<const Symbol> samples,
                                   RngStream& rng);

/// Exact law of one player's message: (message word, probability) pairs with
/// positive probability.
using MessageLaw = std::vector<std::pair<std::uint64_t, double>>;

/// Exact law of a whole transcript whose messages are independent (private
/// coins, or public coins conditioned on one realization).
struct ProductLaw {
  std::vector<MessageLaw> per_player;

  /// Number of transcript atoms with positive probability.
  std::uint64_t atom_count() const;
};

/// Per-player message laws for deterministic channels, given the shared
/// realization (ignored in private mode).
ProductLaw message_laws(const ProtocolSpec& spec, const Distribution& p,
                        std::span<const std::uint64_t> shared = {});

/// Independent per-message Markov kernel applied by the referee, e.g. the
/// flip-to-zero step of the simulation protocols.
using MessageKernel =
    std::function<MessageLaw(std::size_t player, std::uint64_t message)>;

/// Law of the transcript after the referee applies `kernel` to each message.
ProductLaw apply_kernel(const ProductLaw& law, const MessageKernel& kernel);

/// Visits every transcript atom with positive probability in lexicographic
/// player order. Throws std::length_error naming the cap if the number of
/// atoms exceeds `cap`.
void for_each_transcript(
    const ProductLaw& law,
    const std::function<void(std::span<const std::uint64_t>, double)>& visit,
    std::uint64_t cap = kDefaultEnumerationCap);

using TranscriptDistribution = std::map<std::vector<std::uint64_t>, double>;

/// Exact transcript distribution for deterministic channels. Public-mode
/// specs are enumerated conditionally on `shared`.
TranscriptDistribution enumerate_transcripts(
    const ProtocolSpec& spec, const Distribution& p,
    std::span<const std::uint64_t> shared = {},
    std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace dsim::smp
