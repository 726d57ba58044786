#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dsim/rng.hpp"

namespace dsim {

/// A symbol of the alphabet [k], stored 0-based.
using Symbol = std::size_t;

/// Tolerance used when validating a probability vector.
inline constexpr double kMassTolerance = 1e-12;

/// A probability distribution over the finite alphabet {0, ..., k-1}.
///
/// Construction validates that every entry is finite and non-negative and
/// that the entries sum to one within kMassTolerance, then renormalizes so
/// later arithmetic starts from an exact-as-possible simplex point.
class Distribution {
 public:
  explicit Distribution(std::vector<double> probs);

  static Distribution uniform(std::size_t k);
  static Distribution point_mass(std::size_t k, Symbol at);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](Symbol i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  /// Total mass of the symbols in `set`.
  double mass_of(std::span<const Symbol> set) const;

  double max_prob() const;
  double l2_norm() const;

  bool operator==(const Distribution&) const = default;

 private:
  std::vector<double> probs_;
};

double l1_distance(const Distribution& p, const Distribution& q);
/// Half the l1 distance.
double tv_distance(const Distribution& p, const Distribution& q);
double l2_distance(const Distribution& p, const Distribution& q);

/// Paired perturbation of u_k: pair (2i, 2i+1) gets ((1 ± 2 eps)/k, (1 ∓ 2 eps)/k)
/// according to signs[i]. The result is exactly eps away from u_k in TV.
Distribution paninski_family(std::size_t k, double eps,
                             const std::vector<bool>& signs);
/// Same with all signs positive.
Distribution paninski_family(std::size_t k, double eps);

/// Exact image of `p` under the total map i -> f[i] into [target_size].
Distribution pushforward(const Distribution& p, std::span<const std::size_t> f,
                         std::size_t target_size);

/// Inverse-CDF sampler. Holds its own copy of the weights; cheap to copy.
class Sampler {
 public:
  explicit Sampler(const Distribution& p)
      : dist_(p.probs().begin(), p.probs().end()) {}

  template <class Urbg>
  Symbol operator()(Urbg& g) {
    return static_cast<Symbol>(dist_(g));
  }

 private:
  std::discrete_distribution<std::size_t> dist_;
};

/// n i.i.d. draws from p. Deterministic in (p, n, rng state).
std::vector<Symbol> sample_iid(const Distribution& p, std::size_t n,
                               RngStream& rng);

/// JSON array of probabilities.
std::string to_json(const Distribution& p);
Distribution distribution_from_json(const std::string& text);

}  // namespace dsim
