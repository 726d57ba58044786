#include "dsim/simulate_infer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsim {

double InferenceTask::hoeffding_overshoot(std::size_t n, double delta) {
  if (n == 0) throw std::invalid_argument("hoeffding_overshoot: N must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("hoeffding_overshoot: delta must lie in (0, 1)");
  }
  return 2.0 + std::log2(1.0 / delta) / static_cast<double>(n);
}

void InferenceTask::validate() const {
  if (k < 2) throw std::invalid_argument("InferenceTask.k must be at least 2");
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("InferenceTask.eps must lie in (0, 1]");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("InferenceTask.delta must lie in (0, 1)");
  }
  if (centralized_samples == 0) {
    throw std::invalid_argument("InferenceTask.centralized_samples must be at least 1");
  }
  // Small slack so that the exact Hoeffding value itself passes.
  if (!(overshoot >= hoeffding_overshoot(centralized_samples, delta) - 1e-12)) {
    throw std::invalid_argument("InferenceTask.overshoot is below 2 + log2(1/delta)/N");
  }
  if (kind == TaskKind::identity) {
    if (!reference) throw std::invalid_argument("InferenceTask.reference is required for identity");
    if (reference->size() != k) {
      throw std::invalid_argument("InferenceTask.reference has the wrong alphabet size");
    }
  }
}

std::size_t simulation_blocks(const InferenceTask& task) {
  return static_cast<std::size_t>(
      std::ceil(4.0 * task.overshoot * static_cast<double>(task.centralized_samples) - 1e-9));
}

std::size_t simulation_players(const InferenceTask& task, unsigned bits) {
  return simulation_blocks(task) * 4 * sim::BlockLayout(task.k, bits).parts();
}

std::size_t centralized_samples_for_budget(std::size_t players, std::size_t k,
                                           unsigned bits, double delta) {
  InferenceTask t;
  t.k = k;
  t.delta = delta;
  auto fits = [&](std::size_t n) {
    t.centralized_samples = n;
    t.overshoot = InferenceTask::hoeffding_overshoot(n, delta);
    return simulation_players(t, bits) <= players;
  };
  if (!fits(1)) return 0;
  std::size_t lo = 1, hi = 2;
  while (fits(hi)) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (fits(mid) ? lo : hi) = mid;
  }
  return lo;
}

Distribution empirical_learn(std::span<const Symbol> samples, std::size_t k) {
  if (samples.empty()) throw std::invalid_argument("empirical_learn: no samples");
  std::vector<double> counts(k, 0.0);
  for (Symbol s : samples) {
    if (s >= k) throw std::out_of_range("empirical_learn: sample outside [k]");
    counts[s] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  for (double& c : counts) c /= n;
  return Distribution(std::move(counts));
}

std::uint64_t count_collisions(std::span<const Symbol> samples, std::size_t k) {
  std::vector<std::uint64_t> counts(k, 0);
  for (Symbol s : samples) {
    if (s >= k) throw std::out_of_range("count_collisions: sample outside [k]");
    ++counts[s];
  }
  std::uint64_t c = 0;
  for (auto n : counts) c += n * (n - (n > 0 ? 1 : 0)) / 2;
  return c;
}

TestVerdict collision_uniformity_test(std::span<const Symbol> samples,
                                      std::size_t k, double eps) {
  if (samples.size() < 2) {
    throw std::invalid_argument("collision_uniformity_test: need at least 2 samples");
  }
  const double n = static_cast<double>(samples.size());
  TestVerdict v;
  v.statistic = static_cast<double>(count_collisions(samples, k));
  v.threshold = n * (n - 1.0) / 2.0 * (1.0 + 2.0 * eps * eps) / static_cast<double>(k);
  v.accept = v.statistic <= v.threshold;
  return v;
}

TestVerdict centralized_identity_test(std::span<const Symbol> samples,
                                      const GoldreichMap& map, double eps,
                                      RngStream& rng) {
  std::vector<Symbol> mapped(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) mapped[i] = map.sample(samples[i], rng);
  return collision_uniformity_test(mapped, map.target_size(), 16.0 * eps / 25.0);
}

TestVerdict centralized_identity_test(std::span<const Symbol> samples,
                                      const Distribution& reference, double eps,
                                      RngStream& rng) {
  return centralized_identity_test(samples, GoldreichMap(reference), eps, rng);
}

std::size_t required_players(const InferenceTask& task, unsigned bits,
                             const PlayerConstants& constants) {
  const double k = static_cast<double>(task.k);
  const double ratio = std::max(1.0, k / std::ldexp(1.0, static_cast<int>(bits)));
  const double lg = std::log2(1.0 / task.delta);
  const double e2 = task.eps * task.eps;
  double v = 0.0;
  if (task.kind == TaskKind::learning) {
    v = constants.c_learn * ratio * (k + lg) / e2;
  } else {
    v = constants.c_test * ratio * (std::sqrt(k * lg) + lg) / e2;
  }
  return static_cast<std::size_t>(std::ceil(v - 1e-9));
}

namespace detail {

InferenceResult finish_inference(const InferenceTask& task,
                                 std::vector<Symbol>& simulated,
                                 RngStream& estimator_rng) {
  const bool enough = simulated.size() >= task.centralized_samples;
  if (task.kind == TaskKind::learning) {
    LearningResult r{Distribution::uniform(task.k), !enough, simulated.size()};
    if (enough) r.estimate = empirical_learn(simulated, task.k);
    return r;
  }
  TestingResult r;
  r.simulated = simulated.size();
  r.fallback = !enough || simulated.size() < 2;
  if (!r.fallback) {
    r.verdict = centralized_identity_test(simulated, *task.reference, task.eps, estimator_rng);
  }
  return r;
}

}  // namespace detail

InferenceResult simulate_and_infer(const InferenceTask& task, unsigned bits,
                                   SampleSource& players, RngStream& rng) {
  RngStream referee = rng.child(0);
  RngStream estimator = rng.child(1);
  return simulate_and_infer(task, bits, players, referee, estimator);
}

}  // namespace dsim
