#pragma once

// Moments of the flattened perturbation Z_r = sum_i delta_i [Y_i = r] under
// random balanced and 4-wise independent partitions.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "dsim/public_coin.hpp"
#include "dsim/rng.hpp"

namespace dsim {

/// Real vector summing to zero (within 1e-12).
class PerturbationVector {
 public:
  explicit PerturbationVector(std::vector<double> delta);
  /// p - q.
  static PerturbationVector difference(const Distribution& p, const Distribution& q);

  std::size_t size() const noexcept { return delta_.size(); }
  double operator[](std::size_t i) const { return delta_[i]; }
  std::span<const double> values() const noexcept { return delta_; }
  double norm2_sq() const;
  double norm4_4() const;

 private:
  std::vector<double> delta_;
};

std::vector<double> z_vector(const PerturbationVector& delta,
                             const PartitionAssignment& part);

/// P[Y_1 = Y_2] = (k/L - 1) / (k - 1) for a uniformly random balanced
/// partition. Throws when L does not divide k.
double collision_prob_exact(std::size_t k, std::size_t parts);

/// Sums of delta_a delta_b delta_c delta_d over quadruples in [k]^4 grouped
/// by the number of distinct indices (1..4), in closed form.
std::array<double, 4> sigma_sums(const PerturbationVector& delta);

enum class PartitionSampler { balanced, fourwise };

struct MomentReport {
  std::vector<double> mean_per_part;
  std::vector<double> stderr_per_part;
  double mean_sq_norm = 0.0;
  double stderr_sq_norm = 0.0;
  double mean_fourth_norm = 0.0;
  double stderr_fourth_norm = 0.0;
  /// Per-part E[Z_r^4] estimates, checked against 12 m_r |delta|^4.
  std::vector<double> mean_fourth_per_part;
  double predicted_sq = 0.0;
  double predicted_fourth_bound = 0.0;
  std::size_t trials = 0;
};

nlohmann::json to_json(const MomentReport& r);

/// Monte Carlo moments of Z. Trial t draws its partition from rng.child(t);
/// trials run on `workers` threads (0 = default) with identical results.
/// The 4-wise sampler labels the k symbols with a cubic over GF(2^m),
/// m = ceil(log2 k) + log2 L, so L must be a power of two.
MomentReport moment_lab(const PerturbationVector& delta, std::size_t parts,
                        PartitionSampler sampler, std::size_t trials, RngStream& rng,
                        unsigned workers = 0);

/// Fraction of balanced partitions with |Z|_2^2 > threshold.
double anticoncentration_estimate(const PerturbationVector& delta, std::size_t parts,
                                  std::size_t trials, double threshold, RngStream& rng,
                                  unsigned workers = 0);

/// Fraction with lower < |Z|_2^2 <= upper.
double band_estimate(const PerturbationVector& delta, std::size_t parts,
                     std::size_t trials, double lower, double upper, RngStream& rng,
                     unsigned workers = 0);

}  // namespace dsim
