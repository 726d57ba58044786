#include "dsim/param_identity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dsim {

EffectiveSupport effective_support(const Distribution& q, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("effective_support: eps must lie in [0, 1]");
  }
  std::vector<Symbol> order(q.size());
  std::iota(order.begin(), order.end(), Symbol{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Symbol a, Symbol b) { return q[a] > q[b]; });
  EffectiveSupport s;
  const double goal = 1.0 - eps - 1e-12;
  for (Symbol i : order) {
    if (s.mass >= goal) break;
    s.indices.push_back(i);
    s.mass += q[i];
  }
  return s;
}

double kappa(std::span<const double> a, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("kappa: t must be non-negative");
  std::vector<double> v(a.begin(), a.end());
  for (double x : v) {
    if (!(x >= 0.0)) throw std::invalid_argument("kappa: entries must be non-negative");
  }
  std::sort(v.begin(), v.end(), std::greater<>());
  const std::size_t k = v.size();
  // suffix sums of squares: q_lo[j] = sum_{i >= j} v_i^2
  std::vector<double> q_lo(k + 1, 0.0);
  for (std::size_t i = k; i-- > 0;) q_lo[i] = q_lo[i + 1] + v[i] * v[i];
  double best = std::accumulate(v.begin(), v.end(), 0.0);  // lambda = 0
  double s_hi = 0.0;
  // Segment j: the j largest entries exceed lambda, lambda in [v_j, v_{j-1}].
  for (std::size_t j = 0; j <= k; ++j) {
    if (j > 0) s_hi += v[j - 1];
    const double hi = j == 0 ? (k ? v[0] : 0.0) : v[j - 1];
    const double lo = j < k ? v[j] : 0.0;
    const double jd = static_cast<double>(j);
    auto f = [&](double lam) { return s_hi - jd * lam + t * std::sqrt(q_lo[j] + jd * lam * lam); };
    best = std::min({best, f(lo), f(hi)});
    if (t * t > jd && j > 0) {
      const double lam = std::sqrt(q_lo[j] / (t * t - jd));
      if (lam > lo && lam < hi) best = std::min(best, f(lam));
    }
  }
  return best;
}

double kappa_inverse(std::span<const double> a, double y) {
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  if (!(y > 0.0)) throw std::invalid_argument("kappa_inverse: y must be positive");
  if (y > total + 1e-12) {
    throw std::invalid_argument("kappa_inverse: y exceeds sup kappa = " + std::to_string(total));
  }
  y = std::min(y, total);
  double lo = 0.0, hi = 1.0;
  while (kappa(a, hi) < y) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    (kappa(a, mid) >= y ? hi : lo) = mid;
  }
  return hi;
}

double phi(const Distribution& q, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("phi: gamma must lie in (0, 1)");
  }
  const double t = kappa_inverse(q.probs(), 1.0 - gamma);
  return 2.0 * t * t;
}

FoldMap::FoldMap(std::size_t k, const EffectiveSupport& support)
    : index_(k, support.indices.size()), size_(support.indices.size() + 1) {
  for (std::size_t j = 0; j < support.indices.size(); ++j) {
    index_.at(support.indices[j]) = j;
  }
}

Distribution FoldMap::apply(const Distribution& p) const {
  return pushforward(p, index_, size_);
}

UniformityRunner balanced_runner(unsigned ell, double delta, const Constants& constants) {
  return [=](const Distribution& reference, double eps, SampleSource& players,
             RngStream& rng) {
    return public_identity_test(reference, ell, eps, delta, players, rng, constants);
  };
}

ParamIdentityReport parameterized_identity_protocol(const Distribution& q, double eps,
                                                    const UniformityRunner& runner,
                                                    SampleSource& players, RngStream& rng) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("parameterized_identity_protocol: eps must lie in (0, 1]");
  }
  if (players.alphabet_size() != q.size()) {
    throw std::invalid_argument("parameterized_identity_protocol: alphabet mismatch");
  }
  const auto support = effective_support(q, eps / 3.0);
  const FoldMap fold(q.size(), support);
  MappedSource folded(players, [&fold](Symbol x) { return fold(x); }, fold.target_size());
  ParamIdentityReport rep;
  rep.support_size = support.indices.size();
  rep.inner = runner(fold.apply(q), eps / 3.0, folded, rng);
  rep.verdict = rep.inner.verdict;
  return rep;
}

std::size_t param_identity_player_bound(const Distribution& q, double eps, double delta,
                                        unsigned ell, const Constants& constants) {
  const auto k = static_cast<std::size_t>(std::ceil(phi(q, eps / 9.0) - 1e-9)) + 1;
  return plan_public_test(std::max<std::size_t>(k, 2), ell, eps / 3.0, delta, false,
                          constants)
      .nominal_players();
}

}  // namespace dsim
