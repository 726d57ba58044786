#include "dsim/partition_moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dsim/gf2m.hpp"
#include "dsim/stats.hpp"

namespace dsim {

namespace {

// Trials are grouped into fixed-size chunks accumulated in trial order, then
// merged in chunk order, so results do not depend on the worker count.
constexpr std::size_t kChunk = 4096;

unsigned log2_exact(std::size_t parts) {
  if (parts == 0 || (parts & (parts - 1)) != 0) {
    throw std::invalid_argument("4-wise sampler needs L to be a power of two");
  }
  unsigned ell = 0;
  while ((std::size_t{1} << ell) < parts) ++ell;
  return ell;
}

PartitionAssignment draw_partition(std::size_t k, std::size_t parts,
                                   PartitionSampler sampler, RngStream& rng) {
  if (sampler == PartitionSampler::balanced) {
    return random_balanced_partition(k, parts, rng);
  }
  const unsigned ell = log2_exact(parts);
  std::vector<std::uint8_t> seed(gf::fourwise_seed_bits(k, ell));
  CountingCoins coins(rng);
  for (auto& b : seed) b = coins.bit();
  return fourwise_assignment(k, ell, seed);
}

double sq_norm(const std::vector<double>& z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return s;
}

}  // namespace

PerturbationVector::PerturbationVector(std::vector<double> delta) : delta_(std::move(delta)) {
  double sum = 0.0, scale = 0.0;
  for (double d : delta_) {
    if (!std::isfinite(d)) throw std::invalid_argument("PerturbationVector: non-finite entry");
    sum += d;
    scale += std::abs(d);
  }
  if (std::abs(sum) > 1e-12 * std::max(1.0, scale)) {
    throw std::invalid_argument("PerturbationVector: entries sum to " + std::to_string(sum) +
                                ", not 0");
  }
}

PerturbationVector PerturbationVector::difference(const Distribution& p,
                                                  const Distribution& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("PerturbationVector: size mismatch");
  }
  std::vector<double> d(p.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = p[i] - q[i];
  return PerturbationVector(std::move(d));
}

double PerturbationVector::norm2_sq() const {
  double s = 0.0;
  for (double d : delta_) s += d * d;
  return s;
}

double PerturbationVector::norm4_4() const {
  double s = 0.0;
  for (double d : delta_) s += d * d * d * d;
  return s;
}

std::vector<double> z_vector(const PerturbationVector& delta,
                             const PartitionAssignment& part) {
  if (delta.size() != part.labels.size()) {
    throw std::invalid_argument("z_vector: delta has " + std::to_string(delta.size()) +
                                " entries, partition has " +
                                std::to_string(part.labels.size()));
  }
  std::vector<double> z(part.parts, 0.0);
  for (std::size_t i = 0; i < delta.size(); ++i) z.at(part.labels[i]) += delta[i];
  return z;
}

double collision_prob_exact(std::size_t k, std::size_t parts) {
  if (parts == 0 || k < 2 || k % parts != 0) {
    throw std::invalid_argument("collision_prob_exact: need k >= 2 and L dividing k");
  }
  return (static_cast<double>(k / parts) - 1.0) / (static_cast<double>(k) - 1.0);
}

std::array<double, 4> sigma_sums(const PerturbationVector& delta) {
  const double n2 = delta.norm2_sq();
  const double n4 = delta.norm4_4();
  const double s1 = n4;
  const double s2 = 3.0 * n2 * n2 - 7.0 * n4;
  const double s3 = 12.0 * n4 - 6.0 * n2 * n2;
  return {s1, s2, s3, -(s1 + s2 + s3)};
}

nlohmann::json to_json(const MomentReport& r) {
  return {{"mean_per_part", r.mean_per_part},
          {"stderr_per_part", r.stderr_per_part},
          {"mean_sq_norm", r.mean_sq_norm},
          {"stderr_sq_norm", r.stderr_sq_norm},
          {"mean_fourth_norm", r.mean_fourth_norm},
          {"stderr_fourth_norm", r.stderr_fourth_norm},
          {"mean_fourth_per_part", r.mean_fourth_per_part},
          {"predicted_sq", r.predicted_sq},
          {"predicted_fourth_bound", r.predicted_fourth_bound},
          {"trials", r.trials}};
}

MomentReport moment_lab(const PerturbationVector& delta, std::size_t parts,
                        PartitionSampler sampler, std::size_t trials, RngStream& rng,
                        unsigned workers) {
  if (trials == 0) throw std::invalid_argument("moment_lab: trials must be positive");
  const std::size_t k = delta.size();
  struct Acc {
    std::vector<RunningStats> part, part4;
    RunningStats sq, fourth;
  };
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  auto accs = run_trials(
      chunks,
      [&](std::size_t c) {
        Acc a;
        a.part.resize(parts);
        a.part4.resize(parts);
        const std::size_t end = std::min(trials, (c + 1) * kChunk);
        for (std::size_t t = c * kChunk; t < end; ++t) {
          RngStream trial = rng.child(t);
          const auto z = z_vector(delta, draw_partition(k, parts, sampler, trial));
          const double s = sq_norm(z);
          a.sq.add(s);
          a.fourth.add(s * s);
          for (std::size_t r = 0; r < parts; ++r) {
            a.part[r].add(z[r]);
            a.part4[r].add(z[r] * z[r] * z[r] * z[r]);
          }
        }
        return a;
      },
      workers);
  Acc total;
  total.part.resize(parts);
  total.part4.resize(parts);
  for (const auto& a : accs) {
    total.sq.merge(a.sq);
    total.fourth.merge(a.fourth);
    for (std::size_t r = 0; r < parts; ++r) {
      total.part[r].merge(a.part[r]);
      total.part4[r].merge(a.part4[r]);
    }
  }
  MomentReport rep;
  rep.trials = trials;
  for (std::size_t r = 0; r < parts; ++r) {
    rep.mean_per_part.push_back(total.part[r].mean());
    rep.stderr_per_part.push_back(total.part[r].std_error());
    rep.mean_fourth_per_part.push_back(total.part4[r].mean());
  }
  rep.mean_sq_norm = total.sq.mean();
  rep.stderr_sq_norm = total.sq.std_error();
  rep.mean_fourth_norm = total.fourth.mean();
  rep.stderr_fourth_norm = total.fourth.std_error();
  const double n2 = delta.norm2_sq();
  const double collide = sampler == PartitionSampler::balanced
                             ? collision_prob_exact(k, parts)
                             : 1.0 / static_cast<double>(parts);
  rep.predicted_sq = (1.0 - collide) * n2;
  rep.predicted_fourth_bound = 16.0 * n2 * n2;
  return rep;
}

double band_estimate(const PerturbationVector& delta, std::size_t parts,
                     std::size_t trials, double lower, double upper, RngStream& rng,
                     unsigned workers) {
  if (trials == 0) throw std::invalid_argument("band_estimate: trials must be positive");
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  auto hits = run_trials(
      chunks,
      [&](std::size_t c) {
        std::size_t h = 0;
        const std::size_t end = std::min(trials, (c + 1) * kChunk);
        for (std::size_t t = c * kChunk; t < end; ++t) {
          RngStream trial = rng.child(t);
          const double s = sq_norm(
              z_vector(delta, random_balanced_partition(delta.size(), parts, trial)));
          if (s > lower && s <= upper) ++h;
        }
        return h;
      },
      workers);
  std::size_t total = 0;
  for (auto h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(trials);
}

double anticoncentration_estimate(const PerturbationVector& delta, std::size_t parts,
                                  std::size_t trials, double threshold, RngStream& rng,
                                  unsigned workers) {
  if (!(threshold >= 0.0)) {
    throw std::invalid_argument("anticoncentration_estimate: threshold must be non-negative");
  }
  return band_estimate(delta, parts, trials, threshold,
                       std::numeric_limits<double>::infinity(), rng, workers);
}

}  // namespace dsim
