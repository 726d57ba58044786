#pragma once

// Public-coin identity testing: flatten through a shared random partition of
// the (Goldreich-reduced) domain into L = 2^l parts, test the induced
// distribution in l2, and amplify the block verdicts.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dsim/constants.hpp"
#include "dsim/distribution.hpp"
#include "dsim/goldreich.hpp"
#include "dsim/rng.hpp"
#include "dsim/sample_source.hpp"
#include "dsim/simulate_infer.hpp"

namespace dsim {

struct PartitionAssignment {
  std::vector<std::uint32_t> labels;  // values in [parts]
  std::size_t parts = 1;
  bool balanced = false;
};

/// Uniform over balanced partitions: a uniformly shuffled copy of the label
/// multiset {0^(k/L), ..., (L-1)^(k/L)}. Throws when L does not divide k.
PartitionAssignment random_balanced_partition(std::size_t k, std::size_t parts,
                                              RngStream& rng);

/// Labels from a cubic polynomial over GF(2^m) given as 4m seed bits.
PartitionAssignment fourwise_assignment(std::size_t k_prime, unsigned ell,
                                        std::span<const std::uint8_t> seed);

/// result_r = p(S_r).
Distribution induced(const Distribution& p, const PartitionAssignment& part);

/// Poissonized l2 statistic against a known reference:
/// S = sum_r (N_r - m q_r)^2 - N_r with E[S] = m^2 |p - q|_2^2.
/// Accepts iff S <= m^2 gamma'^2 / 2.
TestVerdict l2_identity_test(std::span<const std::uint64_t> counts,
                             std::span<const double> reference,
                             double poisson_mean, double gamma_prime);

/// ceil(C_l2 |q|_2 / gamma'^2 log(1/delta')).
std::size_t l2_sample_size(double C_l2, double reference_norm,
                           double gamma_prime, double delta_prime);

/// Accepts iff the mean of `bits` is at least (theta1 + 1 - theta2) / 2.
TestVerdict amplify(std::span<const std::uint8_t> bits, double theta1, double theta2);
/// ceil(C_amp log2(1/delta) / (theta1 + theta2 - 1)^2).
std::size_t amplify_rounds(double C_amp, double delta, double theta1, double theta2);

/// Shape of a run of the public-coin tester.
struct PublicTestPlan {
  std::size_t k = 0;
  unsigned ell = 1;
  double eps = 0.1;
  double delta = 0.1;
  bool fourwise = false;
  std::size_t domain = 0;      // size of the reduced domain
  std::size_t parts = 2;       // L
  double block_mean = 0.0;     // Poisson mean m of players per block
  std::size_t blocks = 0;      // amplification rounds N
  double gamma_prime = 0.0;    // l2 threshold eps / sqrt(10 k)
  double delta_prime = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;

  std::size_t nominal_players() const;
};

/// Plan with m = ceil(C_blk k / (2^(l/2) eps^2)) and N from amplify_rounds.
/// Balanced plans use delta' = c / (2 (1 + c)), theta1 = (1 + c/2)/(1 + c),
/// theta2 = (c + c^2/2)/(1 + c) on a domain of L ceil(5k / L) symbols;
/// 4-wise plans use delta' = c / (2 + c), theta1 = (c^2 - 2c + 8)/(4(c + 2)),
/// theta2 = 2c / (c + 2) on [5k].
PublicTestPlan plan_public_test(std::size_t k, unsigned ell, double eps,
                                double delta, bool fourwise, const Constants& constants);

/// Same plan with the block mean replaced so that N m is about `players`.
PublicTestPlan with_player_budget(PublicTestPlan plan, std::size_t players);

struct PublicTestReport {
  TestVerdict verdict;
  std::size_t players_used = 0;
  std::size_t blocks = 0;
  std::size_t public_coins = 0;  // seed bits (4-wise variant only)
  std::size_t gate_failures = 0;
};

/// Public random bits that remember how many were handed out.
class CountingCoins {
 public:
  explicit CountingCoins(RngStream rng) : rng_(std::move(rng)) {}
  std::uint8_t bit() {
    if (left_ == 0) {
      pool_ = rng_();
      left_ = 64;
    }
    const auto b = static_cast<std::uint8_t>(pool_ & 1);
    pool_ >>= 1;
    --left_;
    ++used_;
    return b;
  }
  std::size_t used() const noexcept { return used_; }

 private:
  RngStream rng_;
  std::uint64_t pool_ = 0;
  unsigned left_ = 0;
  std::size_t used_ = 0;
};

/// Runs a planned test of `players` against q. Block b draws its public
/// randomness from rng.child(b). Throws InsufficientSamples when the source
/// runs dry.
PublicTestReport run_public_test(const PublicTestPlan& plan, const Distribution& q,
                                 SampleSource& players, RngStream& rng);

/// Balanced-partition tester with planned constants.
PublicTestReport public_identity_test(const Distribution& q, unsigned ell, double eps,
                                      double delta, SampleSource& players,
                                      RngStream& rng, const Constants& constants);
/// 4-wise independent variant: O(log k) public coins per block.
PublicTestReport public_identity_test_efficient(const Distribution& q, unsigned ell,
                                                double eps, double delta,
                                                SampleSource& players, RngStream& rng,
                                                const Constants& constants);

}  // namespace dsim
