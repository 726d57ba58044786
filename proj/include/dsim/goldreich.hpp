#pragma once

#include <cstddef>
#include <vector>

#include "dsim/distribution.hpp"
#include "dsim/rng.hpp"

namespace dsim {

/// Randomized reduction from identity testing against q on [k] to
/// uniformity testing on [target] (target = 5k by default).
///
/// Two stages. Mixing: with probability alpha = 1/5 the sample is replaced by
/// a uniform symbol, so q becomes q1 = (1 - alpha) q + alpha u_k with every
/// q1(i) >= alpha / k. Graining: symbol i owns m_i = floor(target * q1(i))
/// dedicated targets; it lands uniformly in them with probability
/// m_i / (target * q1(i)) and uniformly in the leftover targets otherwise.
/// The image of q is exactly uniform on [target].
class GoldreichMap {
 public:
  static constexpr double kMixWeight = 0.2;

  explicit GoldreichMap(const Distribution& q);
  /// target must be at least 5k; larger targets keep the exact-uniform image.
  GoldreichMap(const Distribution& q, std::size_t target);

  std::size_t source_size() const noexcept { return q1_.size(); }
  std::size_t target_size() const noexcept { return target_; }

  std::size_t block_begin(Symbol i) const { return begin_[i]; }
  std::size_t block_size(Symbol i) const { return size_[i]; }
  std::size_t leftover_begin() const noexcept { return leftover_begin_; }
  std::size_t leftover_size() const noexcept { return target_ - leftover_begin_; }
  double accept_prob(Symbol i) const { return accept_[i]; }
  const std::vector<double>& mixed_reference() const noexcept { return q1_; }

  /// One draw of F_q(x).
  Symbol sample(Symbol x, RngStream& rng) const;
  /// Exact law of F_q(X) for X ~ p.
  Distribution pushforward(const Distribution& p) const;

 private:
  void build(const Distribution& q);

  std::size_t target_;
  std::vector<double> q1_;
  std::vector<std::size_t> begin_;
  std::vector<std::size_t> size_;
  std::vector<double> accept_;
  std::size_t leftover_begin_ = 0;
};

inline GoldreichMap goldreich_map(const Distribution& q) { return GoldreichMap(q); }
inline Symbol goldreich_sample(const GoldreichMap& map, Symbol x, RngStream& rng) {
  return map.sample(x, rng);
}
inline Distribution goldreich_pushforward(const GoldreichMap& map,
                                          const Distribution& p) {
  return map.pushforward(p);
}

}  // namespace dsim
