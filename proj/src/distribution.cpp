#include "dsim/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace dsim {

namespace {

void require_same_size(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("distribution size mismatch: " +
                                std::to_string(p.size()) + " vs " +
                                std::to_string(q.size()));
  }
}

}  // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw std::invalid_argument("distribution must have k >= 1 entries");
  }
  double total = 0.0;
  for (double x : probs_) {
    if (!std::isfinite(x) || x < 0.0) {
      throw std::invalid_argument("probabilities must be finite and non-negative");
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("probabilities sum to " + std::to_string(total) +
                                ", expected 1");
  }
  for (double& x : probs_) x /= total;
}

Distribution Distribution::uniform(std::size_t k) {
  if (k == 0) throw std::invalid_argument("uniform: k must be positive");
  return Distribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

Distribution Distribution::point_mass(std::size_t k, Symbol at) {
  if (at >= k) throw std::invalid_argument("point_mass: symbol out of range");
  std::vector<double> v(k, 0.0);
  v[at] = 1.0;
  return Distribution(std::move(v));
}

double Distribution::mass_of(std::span<const Symbol> set) const {
  double m = 0.0;
  for (Symbol s : set) m += probs_.at(s);
  return m;
}

double Distribution::max_prob() const {
  return *std::max_element(probs_.begin(), probs_.end());
}

double Distribution::l2_norm() const {
  double s = 0.0;
  for (double x : probs_) s += x * x;
  return std::sqrt(s);
}

double l1_distance(const Distribution& p, const Distribution& q) {
  require_same_size(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s;
}

double tv_distance(const Distribution& p, const Distribution& q) {
  return 0.5 * l1_distance(p, q);
}

double l2_distance(const Distribution& p, const Distribution& q) {
  require_same_size(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Distribution paninski_family(std::size_t k, double eps,
                             const std::vector<bool>& signs) {
  if (k == 0 || k % 2 != 0) {
    throw std::invalid_argument("paninski_family: k must be even and positive");
  }
  if (!(eps >= 0.0 && eps <= 0.5)) {
    throw std::invalid_argument("paninski_family: eps must lie in [0, 1/2]");
  }
  if (signs.size() != k / 2) {
    throw std::invalid_argument("paninski_family: need k/2 sign bits");
  }
  const double kd = static_cast<double>(k);
  std::vector<double> v(k);
  for (std::size_t i = 0; i < k / 2; ++i) {
    const double up = (1.0 + 2.0 * eps) / kd;
    const double down = (1.0 - 2.0 * eps) / kd;
    v[2 * i] = signs[i] ? up : down;
    v[2 * i + 1] = signs[i] ? down : up;
  }
  return Distribution(std::move(v));
}

Distribution paninski_family(std::size_t k, double eps) {
  return paninski_family(k, eps, std::vector<bool>(k / 2, true));
}

Distribution pushforward(const Distribution& p, std::span<const std::size_t> f,
                         std::size_t target_size) {
  if (f.size() != p.size()) {
    throw std::invalid_argument("pushforward: map must be total on [k]");
  }
  if (target_size == 0) {
    throw std::invalid_argument("pushforward: empty target alphabet");
  }
  std::vector<double> out(target_size, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] >= target_size) {
      throw std::out_of_range("pushforward: map value " + std::to_string(f[i]) +
                              " outside [" + std::to_string(target_size) + "]");
    }
    out[f[i]] += p[i];
  }
  return Distribution(std::move(out));
}

std::vector<Symbol> sample_iid(const Distribution& p, std::size_t n,
                               RngStream& rng) {
  Sampler draw(p);
  std::vector<Symbol> out(n);
  for (auto& s : out) s = draw(rng);
  return out;
}

std::string to_json(const Distribution& p) {
  nlohmann::json j = std::vector<double>(p.probs().begin(), p.probs().end());
  return j.dump();
}

Distribution distribution_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.is_array()) {
    throw std::invalid_argument("distribution JSON must be an array of numbers");
  }
  return Distribution(j.get<std::vector<double>>());
}

}  // namespace dsim
