#include "dsim/goldreich.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dsim {

GoldreichMap::GoldreichMap(const Distribution& q) : target_(5 * q.size()) {
  build(q);
}

GoldreichMap::GoldreichMap(const Distribution& q, std::size_t target)
    : target_(target) {
  if (target < 5 * q.size()) {
    throw std::invalid_argument("GoldreichMap: target " + std::to_string(target) +
                                " is smaller than 5k = " +
                                std::to_string(5 * q.size()));
  }
  build(q);
}

void GoldreichMap::build(const Distribution& q) {
  const std::size_t k = q.size();
  const double kd = static_cast<double>(k);
  const double td = static_cast<double>(target_);
  q1_.resize(k);
  begin_.resize(k);
  size_.resize(k);
  accept_.resize(k);
  std::size_t next = 0;
  for (Symbol i = 0; i < k; ++i) {
    q1_[i] = (1.0 - kMixWeight) * q[i] + kMixWeight / kd;
    const double scaled = td * q1_[i];
    // Absorb rounding so that e.g. 4.9999999999 counts as 5 targets.
    auto m = static_cast<std::size_t>(std::floor(scaled + 1e-9));
    if (m == 0) m = 1;
    begin_[i] = next;
    size_[i] = m;
    next += m;
  }
  if (next > target_) {
    throw std::logic_error("GoldreichMap: dedicated blocks exceed target size");
  }
  leftover_begin_ = next;
  for (Symbol i = 0; i < k; ++i) {
    const double a = static_cast<double>(size_[i]) / (td * q1_[i]);
    accept_[i] = leftover_size() == 0 ? 1.0 : std::min(1.0, a);
  }
}

Symbol GoldreichMap::sample(Symbol x, RngStream& rng) const {
  if (x >= q1_.size()) throw std::out_of_range("GoldreichMap: symbol outside [k]");
  if (rng.bernoulli(kMixWeight)) x = static_cast<Symbol>(rng.below(q1_.size()));
  if (accept_[x] >= 1.0 || rng.bernoulli(accept_[x])) {
    return begin_[x] + static_cast<Symbol>(rng.below(size_[x]));
  }
  return leftover_begin_ + static_cast<Symbol>(rng.below(leftover_size()));
}

Distribution GoldreichMap::pushforward(const Distribution& p) const {
  const std::size_t k = q1_.size();
  if (p.size() != k) {
    throw std::invalid_argument("GoldreichMap: distribution over the wrong alphabet");
  }
  const double kd = static_cast<double>(k);
  std::vector<double> out(target_, 0.0);
  double to_leftover = 0.0;
  for (Symbol i = 0; i < k; ++i) {
    const double p1 = (1.0 - kMixWeight) * p[i] + kMixWeight / kd;
    const double per_target = p1 * accept_[i] / static_cast<double>(size_[i]);
    for (std::size_t t = 0; t < size_[i]; ++t) out[begin_[i] + t] = per_target;
    to_leftover += p1 * (1.0 - accept_[i]);
  }
  if (leftover_size() > 0) {
    const double each = to_leftover / static_cast<double>(leftover_size());
    for (std::size_t t = leftover_begin_; t < target_; ++t) out[t] = each;
  }
  return Distribution(std::move(out));
}

}  // namespace dsim
