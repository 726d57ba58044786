#pragma once

// Simulate-and-infer: players run the block simulation protocol, the
// referee collects the simulated samples and hands them to an ordinary
// centralized estimator.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dsim/dist_sim.hpp"
#include "dsim/distribution.hpp"
#include "dsim/goldreich.hpp"
#include "dsim/rng.hpp"
#include "dsim/sample_source.hpp"

namespace dsim {

/// accept/reject together with the statistic and threshold behind it.
struct TestVerdict {
  bool accept = true;
  double statistic = 0.0;
  double threshold = 0.0;
};

enum class TaskKind { learning, identity };

struct InferenceTask {
  TaskKind kind = TaskKind::learning;
  std::size_t k = 0;
  double eps = 0.1;
  double delta = 0.1;
  /// Reference distribution (identity testing only).
  std::optional<Distribution> reference;
  /// Samples the centralized estimator needs.
  std::size_t centralized_samples = 1;
  /// Overshoot multiplier C on the number of simulation blocks.
  double overshoot = 2.0;

  /// C = 2 + log2(1/delta) / N.
  static double hoeffding_overshoot(std::size_t n, double delta);
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Number of simulation blocks run by simulate_and_infer: ceil(4 C N).
std::size_t simulation_blocks(const InferenceTask& task);
/// Players consumed by simulate_and_infer: blocks * 4 ceil(k / (2^l - 1)).
std::size_t simulation_players(const InferenceTask& task, unsigned bits);
/// Largest N with simulation_players <= players when C follows the
/// Hoeffding rule; 0 when even N = 1 does not fit.
std::size_t centralized_samples_for_budget(std::size_t players, std::size_t k,
                                           unsigned bits, double delta);

struct LearningResult {
  Distribution estimate;
  bool fallback = false;
  std::size_t simulated = 0;
};
struct TestingResult {
  TestVerdict verdict;
  bool fallback = false;
  std::size_t simulated = 0;
};
using InferenceResult = std::variant<LearningResult, TestingResult>;

/// Normalized counts.
Distribution empirical_learn(std::span<const Symbol> samples, std::size_t k);

/// Number of colliding pairs sum_r binom(count_r, 2).
std::uint64_t count_collisions(std::span<const Symbol> samples, std::size_t k);

/// Accepts iff collisions <= binom(N, 2) (1 + 2 eps^2) / k.
TestVerdict collision_uniformity_test(std::span<const Symbol> samples,
                                      std::size_t k, double eps);

/// Maps each sample through the Goldreich reduction for `reference` and runs
/// the collision test on [5k] at distance 16 eps / 25.
TestVerdict centralized_identity_test(std::span<const Symbol> samples,
                                      const GoldreichMap& map, double eps,
                                      RngStream& rng);
TestVerdict centralized_identity_test(std::span<const Symbol> samples,
                                      const Distribution& reference, double eps,
                                      RngStream& rng);

struct PlayerConstants {
  double c_learn = 1.0;
  double c_test = 1.0;
};

/// Player-count formulas: learning c_L (k/2^l)(k + log2(1/d)) / eps^2,
/// identity c_T (k/2^l)(sqrt(k log2(1/d)) + log2(1/d)) / eps^2, with k/2^l
/// clamped below at 1.
std::size_t required_players(const InferenceTask& task, unsigned bits,
                             const PlayerConstants& constants = {});

/// The full pipeline, with the block referee's coins drawn from `referee`.
/// Blocks draw 4m samples each from `players`; the centralized estimator
/// gets the first N simulated samples. Too few simulated samples yields the
/// fallback: u_k for learning, accept for testing.
template <class Urbg>
InferenceResult simulate_and_infer(const InferenceTask& task, unsigned bits,
                                   SampleSource& players, Urbg& referee,
                                   RngStream& estimator_rng);

/// Convenience overload: referee coins come from rng.child(0), estimator
/// randomness from rng.child(1).
InferenceResult simulate_and_infer(const InferenceTask& task, unsigned bits,
                                   SampleSource& players, RngStream& rng);

// ---------------------------------------------------------------------------

namespace detail {
InferenceResult finish_inference(const InferenceTask& task,
                                 std::vector<Symbol>& simulated,
                                 RngStream& estimator_rng);
}  // namespace detail

template <class Urbg>
InferenceResult simulate_and_infer(const InferenceTask& task, unsigned bits,
                                   SampleSource& players, Urbg& referee,
                                   RngStream& estimator_rng) {
  task.validate();
  if (players.alphabet_size() != task.k) {
    throw std::invalid_argument("simulate_and_infer: sample source alphabet differs from task k");
  }
  const sim::BlockLayout layout(task.k, bits);
  const std::size_t blocks = simulation_blocks(task);
  const std::size_t block_players = 4 * layout.parts();
  if (players.remaining() / block_players < blocks) {
    throw InsufficientSamples("simulate_and_infer needs " +
                              std::to_string(blocks * block_players) +
                              " players, source has " +
                              std::to_string(players.remaining()));
  }
  std::vector<Symbol> samples(block_players);
  std::vector<std::uint64_t> scratch;
  std::vector<Symbol> simulated;
  simulated.reserve(task.centralized_samples);
  for (std::size_t b = 0; b < blocks; ++b) {
    players.fill(samples);
    const auto out = sim::run_block(layout, samples, referee, scratch);
    if (!out.aborted() && simulated.size() < task.centralized_samples) {
      simulated.push_back(out.value());
    }
  }
  return detail::finish_inference(task, simulated, estimator_rng);
}

}  // namespace dsim
