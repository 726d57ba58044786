#pragma once

// Instance-dependent identity testing: effective support, the l1/l2
// K-functional kappa, Phi(q, gamma) = 2 kappa_q^{-1}(1 - gamma)^2, and the
// reduction that folds the light tail of q into a single symbol before
// running a uniformity protocol.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dsim/constants.hpp"
#include "dsim/distribution.hpp"
#include "dsim/public_coin.hpp"
#include "dsim/rng.hpp"
#include "dsim/sample_source.hpp"

namespace dsim {

struct EffectiveSupport {
  std::vector<Symbol> indices;  // in descending-mass order
  double mass = 0.0;
};

/// Minimal prefix of q sorted by decreasing mass (ties: smaller index first)
/// with mass >= 1 - eps.
EffectiveSupport effective_support(const Distribution& q, double eps);

/// kappa_a(t) = inf over a' + a'' = a of |a'|_1 + t |a''|_2, evaluated over
/// the clipping family a'' = min(a, lambda), which is convex in lambda
/// between consecutive entries of a.
double kappa(std::span<const double> a, double t);

/// Smallest t (to 1e-9) with kappa(a, t) >= y. Throws when y exceeds |a|_1.
double kappa_inverse(std::span<const double> a, double y);

/// 2 kappa_q^{-1}(1 - gamma)^2.
double phi(const Distribution& q, double gamma);

/// Folds symbols outside `support` onto one extra symbol (index |support|).
class FoldMap {
 public:
  FoldMap(std::size_t k, const EffectiveSupport& support);
  std::size_t source_size() const noexcept { return index_.size(); }
  std::size_t target_size() const noexcept { return size_; }
  Symbol operator()(Symbol x) const { return index_.at(x); }
  Distribution apply(const Distribution& p) const;

 private:
  std::vector<Symbol> index_;
  std::size_t size_;
};

/// A sample source seen through a symbol map.
class MappedSource final : public SampleSource {
 public:
  MappedSource(SampleSource& inner, std::function<Symbol(Symbol)> map,
               std::size_t alphabet)
      : inner_(inner), map_(std::move(map)), alphabet_(alphabet) {}
  std::size_t alphabet_size() const override { return alphabet_; }
  std::size_t remaining() const override { return inner_.remaining(); }
  void fill(std::span<Symbol> out) override {
    inner_.fill(out);
    for (auto& s : out) s = map_(s);
  }

 private:
  SampleSource& inner_;
  std::function<Symbol(Symbol)> map_;
  std::size_t alphabet_;
};

/// Runs a public-coin test of the given samples against a reference.
using UniformityRunner = std::function<PublicTestReport(
    const Distribution& reference, double eps, SampleSource& players, RngStream& rng)>;

/// The balanced-partition tester with fixed l, delta and constants.
UniformityRunner balanced_runner(unsigned ell, double delta, const Constants& constants);

struct ParamIdentityReport {
  TestVerdict verdict;
  std::size_t support_size = 0;
  PublicTestReport inner;
};

/// Folds the complement of the (eps/3)-effective support of q into one
/// symbol and tests the folded samples against the folded q at distance
/// eps/3 (the runner reduces to uniformity on 5(|S| + 1) symbols).
ParamIdentityReport parameterized_identity_protocol(const Distribution& q, double eps,
                                                    const UniformityRunner& runner,
                                                    SampleSource& players, RngStream& rng);

/// Nominal players of the balanced tester at k = ceil(Phi(q, eps/9)) + 1,
/// distance eps/3.
std::size_t param_identity_player_bound(const Distribution& q, double eps, double delta,
                                        unsigned ell, const Constants& constants);

}  // namespace dsim
