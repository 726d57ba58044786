#include "dsim/public_coin.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "dsim/gf2m.hpp"

namespace dsim {

PartitionAssignment random_balanced_partition(std::size_t k, std::size_t parts,
                                              RngStream& rng) {
  if (parts == 0 || k % parts != 0) {
    throw std::invalid_argument("random_balanced_partition: L=" + std::to_string(parts) +
                                " does not divide k=" + std::to_string(k));
  }
  PartitionAssignment out;
  out.parts = parts;
  out.balanced = true;
  out.labels.resize(k);
  const std::size_t per = k / parts;
  for (std::size_t i = 0; i < k; ++i) out.labels[i] = static_cast<std::uint32_t>(i / per);
  // Fisher-Yates.
  for (std::size_t i = k; i > 1; --i) {
    std::swap(out.labels[i - 1], out.labels[rng.below(i)]);
  }
  return out;
}

PartitionAssignment fourwise_assignment(std::size_t k_prime, unsigned ell,
                                        std::span<const std::uint8_t> seed) {
  auto f = gf::fourwise_labels(k_prime, ell, seed);
  PartitionAssignment out;
  out.labels = std::move(f.labels);
  out.parts = std::size_t{1} << ell;
  out.balanced = false;
  return out;
}

Distribution induced(const Distribution& p, const PartitionAssignment& part) {
  if (p.size() != part.labels.size()) {
    throw std::invalid_argument("induced: distribution has " + std::to_string(p.size()) +
                                " symbols, partition has " +
                                std::to_string(part.labels.size()));
  }
  std::vector<double> out(part.parts, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) out.at(part.labels[i]) += p[i];
  return Distribution(std::move(out));
}

TestVerdict l2_identity_test(std::span<const std::uint64_t> counts,
                             std::span<const double> reference,
                             double poisson_mean, double gamma_prime) {
  if (counts.size() != reference.size()) {
    throw std::invalid_argument("l2_identity_test: counts and reference differ in length");
  }
  if (!std::isfinite(poisson_mean) || !std::isfinite(gamma_prime) || poisson_mean <= 0.0) {
    throw std::invalid_argument("l2_identity_test: non-finite or non-positive parameters");
  }
  double s = 0.0;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (!std::isfinite(reference[r])) {
      throw std::invalid_argument("l2_identity_test: non-finite reference");
    }
    const double n = static_cast<double>(counts[r]);
    const double d = n - poisson_mean * reference[r];
    s += d * d - n;
  }
  TestVerdict v;
  v.statistic = s;
  v.threshold = poisson_mean * poisson_mean * gamma_prime * gamma_prime / 2.0;
  v.accept = s <= v.threshold;
  return v;
}

std::size_t l2_sample_size(double C_l2, double reference_norm, double gamma_prime,
                           double delta_prime) {
  if (!(delta_prime > 0.0 && delta_prime < 1.0) || !(gamma_prime > 0.0)) {
    throw std::invalid_argument("l2_sample_size: need gamma' > 0 and delta' in (0, 1)");
  }
  return static_cast<std::size_t>(std::ceil(
      C_l2 * reference_norm / (gamma_prime * gamma_prime) * std::log(1.0 / delta_prime)));
}

TestVerdict amplify(std::span<const std::uint8_t> bits, double theta1, double theta2) {
  if (!(theta1 > 1.0 - theta2)) {
    throw std::invalid_argument("amplify: need theta1 > 1 - theta2");
  }
  if (bits.empty()) throw std::invalid_argument("amplify: no bits");
  std::size_t ones = 0;
  for (auto b : bits) ones += b ? 1 : 0;
  TestVerdict v;
  v.statistic = static_cast<double>(ones) / static_cast<double>(bits.size());
  v.threshold = (theta1 + 1.0 - theta2) / 2.0;
  v.accept = v.statistic >= v.threshold;
  return v;
}

std::size_t amplify_rounds(double C_amp, double delta, double theta1, double theta2) {
  if (!(theta1 > 1.0 - theta2)) {
    throw std::invalid_argument("amplify_rounds: need theta1 > 1 - theta2");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("amplify_rounds: delta must lie in (0, 1)");
  }
  const double gap = theta1 + theta2 - 1.0;
  return static_cast<std::size_t>(
      std::max(1.0, std::ceil(C_amp * std::log2(1.0 / delta) / (gap * gap))));
}

std::size_t PublicTestPlan::nominal_players() const {
  return static_cast<std::size_t>(std::ceil(block_mean * static_cast<double>(blocks)));
}

PublicTestPlan plan_public_test(std::size_t k, unsigned ell, double eps, double delta,
                                bool fourwise, const Constants& constants) {
  if (k < 2) throw std::invalid_argument("public test: k must be at least 2");
  if (ell == 0 || ell > 16) throw std::invalid_argument("public test: ell must be in [1, 16]");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("public test: eps must be in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("public test: delta must be in (0, 1)");
  PublicTestPlan plan;
  plan.k = k;
  plan.ell = ell;
  plan.eps = eps;
  plan.delta = delta;
  plan.fourwise = fourwise;
  plan.parts = std::size_t{1} << ell;
  const double c = constants.c;
  if (fourwise) {
    plan.domain = 5 * k;
    plan.delta_prime = c / (2.0 + c);
    plan.theta1 = (c * c - 2.0 * c + 8.0) / (4.0 * (c + 2.0));
    plan.theta2 = 2.0 * c / (c + 2.0);
  } else {
    plan.domain = plan.parts * ((5 * k + plan.parts - 1) / plan.parts);
    plan.delta_prime = c / (2.0 * (1.0 + c));
    plan.theta1 = (1.0 + c / 2.0) / (1.0 + c);
    plan.theta2 = (c + c * c / 2.0) / (1.0 + c);
  }
  const double kd = static_cast<double>(k);
  plan.gamma_prime = eps / std::sqrt(10.0 * kd);
  plan.block_mean =
      std::ceil(constants.C_blk * kd / (std::sqrt(static_cast<double>(plan.parts)) * eps * eps));
  plan.blocks = amplify_rounds(constants.C_amp, delta, plan.theta1, plan.theta2);
  return plan;
}

PublicTestPlan with_player_budget(PublicTestPlan plan, std::size_t players) {
  if (players == 0) throw std::invalid_argument("public test: player budget must be positive");
  plan.block_mean = static_cast<double>(players) / static_cast<double>(plan.blocks);
  return plan;
}

PublicTestReport run_public_test(const PublicTestPlan& plan, const Distribution& q,
                                 SampleSource& players, RngStream& rng) {
  if (q.size() != plan.k || players.alphabet_size() != plan.k) {
    throw std::invalid_argument("public test: alphabet size differs from the plan");
  }
  const GoldreichMap map(q, plan.domain);
  const std::size_t L = plan.parts;
  const auto uniform_domain = Distribution::uniform(plan.domain);
  const double gate = 2.0 / std::sqrt(static_cast<double>(L));
  const std::size_t seed_bits =
      plan.fourwise ? gf::fourwise_seed_bits(plan.domain, plan.ell) : 0;

  PublicTestReport report;
  report.blocks = plan.blocks;
  std::vector<std::uint8_t> bits(plan.blocks);
  std::vector<Symbol> samples;
  std::vector<std::uint64_t> counts(L);
  std::vector<std::uint8_t> seed(seed_bits);
  for (std::size_t b = 0; b < plan.blocks; ++b) {
    RngStream block_rng = rng.child(b);
    RngStream public_rng = block_rng.child(0);
    RngStream player_rng = block_rng.child(1);

    PartitionAssignment part;
    if (plan.fourwise) {
      CountingCoins coins(public_rng);
      for (auto& s : seed) s = coins.bit();
      report.public_coins += coins.used();
      part = fourwise_assignment(plan.domain, plan.ell, seed);
    } else {
      part = random_balanced_partition(plan.domain, L, public_rng);
    }

    std::poisson_distribution<std::uint64_t> poisson(plan.block_mean);
    const auto n = static_cast<std::size_t>(poisson(player_rng));
    samples.resize(n);
    players.fill(samples);
    report.players_used += n;

    const Distribution reference = induced(uniform_domain, part);
    if (plan.fourwise && reference.l2_norm() > gate) {
      ++report.gate_failures;
      RngStream coin = block_rng.child(2);
      bits[b] = coin.bernoulli(0.5) ? 1 : 0;
      continue;
    }
    std::fill(counts.begin(), counts.end(), 0);
    for (Symbol x : samples) ++counts[part.labels[map.sample(x, player_rng)]];
    bits[b] = l2_identity_test(counts, reference.probs(), plan.block_mean,
                               plan.gamma_prime).accept
                  ? 1
                  : 0;
  }
  report.verdict = amplify(bits, plan.theta1, plan.theta2);
  return report;
}

PublicTestReport public_identity_test(const Distribution& q, unsigned ell, double eps,
                                      double delta, SampleSource& players,
                                      RngStream& rng, const Constants& constants) {
  const auto plan = plan_public_test(q.size(), ell, eps, delta, false, constants);
  return run_public_test(plan, q, players, rng);
}

PublicTestReport public_identity_test_efficient(const Distribution& q, unsigned ell,
                                                double eps, double delta,
                                                SampleSource& players, RngStream& rng,
                                                const Constants& constants) {
  const auto plan = plan_public_test(q.size(), ell, eps, delta, true, constants);
  return run_public_test(plan, q, players, rng);
}

}  // namespace dsim
