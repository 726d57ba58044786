// Acceptance runner: `acceptance N` checks criterion N, no argument checks
// all of them. Prints one PASS/FAIL line per criterion; exits non-zero if
// any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "dsim/bench.hpp"
#include "dsim/constants.hpp"
#include "dsim/dist_sim.hpp"
#include "dsim/gf2m.hpp"
#include "dsim/goldreich.hpp"
#include "dsim/param_identity.hpp"
#include "dsim/partition_moments.hpp"
#include "dsim/public_coin.hpp"
#include "dsim/stats.hpp"

using namespace dsim;

namespace {

struct Result {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Constants calibrated() {
#ifdef DSIM_CONSTANTS_FILE
  std::ifstream probe(DSIM_CONSTANTS_FILE);
  if (probe) return load_constants(DSIM_CONSTANTS_FILE);
#endif
  return Constants{};
}

// All points of the simplex on [k] with coordinates in multiples of 1/n.
void simplex_grid(std::size_t k, int n, std::vector<int>& cur,
                  const std::function<void(const Distribution&)>& visit) {
  if (cur.size() + 1 == k) {
    int used = 0;
    for (int c : cur) used += c;
    std::vector<double> p;
    for (int c : cur) p.push_back(c / static_cast<double>(n));
    p.push_back((n - used) / static_cast<double>(n));
    visit(Distribution(p));
    return;
  }
  int used = 0;
  for (int c : cur) used += c;
  for (int c = 0; c <= n - used; ++c) {
    cur.push_back(c);
    simplex_grid(k, n, cur, visit);
    cur.pop_back();
  }
}

Distribution random_dist(std::size_t k, RngStream& r) {
  std::vector<double> w(k);
  double s = 0.0;
  for (auto& x : w) s += x = r.uniform() < 0.15 ? 0.0 : r.uniform() * r.uniform();
  if (s == 0.0) return Distribution::uniform(k);
  for (auto& x : w) x /= s;
  return Distribution(w);
}

PerturbationVector random_delta(std::size_t k, RngStream& r) {
  std::vector<double> d(k);
  double mean = 0.0;
  for (auto& x : d) mean += x = r.uniform() - 0.5;
  mean /= static_cast<double>(k);
  for (auto& x : d) x -= mean;
  return PerturbationVector(d);
}

Result exact_simulation() {
  double worst_cond = 0.0, worst_succ = 0.0;
  int points = 0;
  for (std::size_t k = 2; k <= 4; ++k) {
    std::vector<int> cur;
    simplex_grid(k, 10, cur, [&](const Distribution& p) {
      ++points;
      auto check = [&](const sim::ExactLaw& law, double success) {
        worst_succ = std::max(worst_succ, std::abs(law.success - success));
        if (success <= 0.0) return;
        const auto c = law.conditional();
        for (std::size_t i = 0; i < k; ++i) {
          worst_cond = std::max(worst_cond, std::abs(c[i] - p[i]));
        }
      };
      double basic = 1.0;
      for (std::size_t i = 0; i < k; ++i) basic *= 1.0 - p[i];
      check(sim::exact_basic_law(p), basic);
      for (unsigned ell : {1u, 2u}) {
        const sim::BlockLayout layout(k, ell);
        const std::size_t cap = (std::size_t{1} << ell) - 1;
        double block = 1.0;
        for (std::size_t j = 0; j * cap < k; ++j) {
          double mass = 0.0;
          for (std::size_t i = j * cap; i < std::min(k, (j + 1) * cap); ++i) mass += p[i];
          block *= (1.0 - mass / 2.0) * (1.0 - mass / 2.0);
        }
        check(sim::exact_block_law(p, layout), block);
      }
    });
  }
  return {worst_cond <= 1e-9 && worst_succ <= 1e-9,
          fmt("%d grid points, max |cond - p| = %.2e, max |success - formula| = %.2e",
              points, worst_cond, worst_succ)};
}

Result boosted_simulation() {
  const std::size_t k = 10, trials = 100000;
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) w[i] = 1.0 / static_cast<double>(i + 1);
  double s = 0.0;
  for (double x : w) s += x;
  for (auto& x : w) x /= s;
  const Distribution p(w);
  const RngStream root(2024, 0);
  const auto outs = run_trials(trials, [&](std::size_t t) {
    RngStream r = root.child(t);
    const auto o = sim::full_sim(p, 2, 0.25, r).outcome;
    return o.aborted() ? -1 : static_cast<long>(o.value());
  });
  std::vector<double> counts(k, 0.0);
  std::size_t aborts = 0;
  for (long o : outs) {
    if (o < 0) {
      ++aborts;
    } else {
      counts[o] += 1.0;
    }
  }
  const double accepted = static_cast<double>(trials - aborts);
  for (auto& c : counts) c /= accepted;
  const double tv = tv_distance(Distribution(counts), p);
  const double abort_rate = static_cast<double>(aborts) / trials;
  return {abort_rate <= 0.25 && tv <= 0.02,
          fmt("abort rate %.2e (<= 0.25), conditional tv %.4f (<= 0.02) over %.0f samples",
              abort_rate, tv, accepted)};
}

Result flattened_moments() {
  const std::size_t k = 12, L = 3;
  // exhaustive check of the collision probability at k <= 10
  double worst = 0.0;
  for (std::size_t kk = 2; kk <= 10; ++kk) {
    for (std::size_t ll = 1; ll <= kk; ++ll) {
      if (kk % ll) continue;
      std::vector<int> labels(kk);
      for (std::size_t i = 0; i < kk; ++i) labels[i] = static_cast<int>(i / (kk / ll));
      double total = 0, same = 0;
      do {
        ++total;
        same += labels[0] == labels[1];
      } while (std::next_permutation(labels.begin(), labels.end()));
      worst = std::max(worst, std::abs(same / total - collision_prob_exact(kk, ll)));
    }
  }
  const auto delta = PerturbationVector::difference(paninski_family(k, 0.3),
                                                    Distribution::uniform(k));
  RngStream rng(3, 0);
  const auto rep = moment_lab(delta, L, PartitionSampler::balanced, 1000000, rng);
  double worst_sigma = 0.0;
  for (std::size_t r = 0; r < L; ++r) {
    worst_sigma = std::max(worst_sigma, std::abs(rep.mean_per_part[r]) / rep.stderr_per_part[r]);
  }
  const double n2 = delta.norm2_sq();
  const double want = (static_cast<double>(k) - static_cast<double>(k / L)) /
                      (static_cast<double>(k) - 1.0) * n2;
  const double rel = std::abs(rep.mean_sq_norm - want) / want;
  const bool ok = worst <= 1e-12 && worst_sigma <= 4.0 && rel <= 0.02 &&
                  rep.mean_fourth_norm <= 16.0 * n2 * n2;
  return {ok, fmt("max |E Z_r|/se = %.2f, E|Z|^2 off by %.3f%%, E|Z|^4 / (16|d|^4) = %.3f, "
                  "collision enumeration err %.1e",
                  worst_sigma, 100.0 * rel, rep.mean_fourth_norm / (16.0 * n2 * n2), worst)};
}

Result quadruple_sums() {
  RngStream r(4, 0);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = 1 + rep % 10;
    const auto d = k == 1 ? PerturbationVector({0.0}) : random_delta(k, r);
    std::array<double, 4> brute{};
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        for (std::size_t c = 0; c < k; ++c)
          for (std::size_t e = 0; e < k; ++e) {
            std::array<std::size_t, 4> idx{a, b, c, e};
            std::sort(idx.begin(), idx.end());
            const auto n = std::unique(idx.begin(), idx.end()) - idx.begin();
            brute[n - 1] += d[a] * d[b] * d[c] * d[e];
          }
    const auto got = sigma_sums(d);
    for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(got[j] - brute[j]));
  }
  return {worst <= 1e-9, fmt("100 vectors, max abs error %.2e", worst)};
}

Result anticoncentration() {
  const std::size_t k = 24, L = 4;
  const double eps = 0.3;
  const auto delta = PerturbationVector::difference(paninski_family(k, eps),
                                                    Distribution::uniform(k));
  RngStream rng(5, 0);
  const double frac =
      anticoncentration_estimate(delta, L, 100000, eps * eps / (2.0 * k), rng);
  return {frac >= 1.0 / 82.0, fmt("P[|Z|^2 > eps^2/(2k)] = %.4f (>= %.4f)", frac, 1.0 / 82.0)};
}

Result goldreich() {
  RngStream r(6, 0);
  double worst_uniform = 0.0, worst_ratio = 1e300;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = 2 + rep % 31;
    const auto q = random_dist(k, r);
    const GoldreichMap map(q);
    const auto img = map.pushforward(q);
    for (std::size_t i = 0; i < img.size(); ++i) {
      worst_uniform = std::max(worst_uniform, std::abs(img[i] - 1.0 / (5.0 * k)));
    }
    if (rep % 2 == 0) {
      const auto p = random_dist(k, r);
      const double eps = tv_distance(p, q);
      if (eps > 0.0) {
        const double d = tv_distance(map.pushforward(p), img);
        worst_ratio = std::min(worst_ratio, d / eps);
      }
    }
  }
  return {worst_uniform <= 1e-9 && worst_ratio >= 16.0 / 25.0 - 1e-12,
          fmt("max |F_q(q) - u_5k| = %.2e, min tv ratio %.4f (>= 0.64) on 50 pairs",
              worst_uniform, worst_ratio)};
}

Result fourwise_gf16() {
  const gf::Field f(4);
  const std::array<std::uint64_t, 4> pts{1, 2, 7, 12};
  std::vector<int> seen(1 << 16, 0);
  std::array<std::uint64_t, 4> coeff{};
  for (std::uint32_t s = 0; s < (1u << 16); ++s) {
    for (int j = 0; j < 4; ++j) coeff[j] = (s >> (4 * j)) & 0xF;
    std::uint32_t key = 0;
    for (int j = 0; j < 4; ++j) key |= static_cast<std::uint32_t>(f.eval(coeff, pts[j])) << (4 * j);
    ++seen[key];
  }
  const bool ok = std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
  return {ok, "65536 cubics, every value tuple at 4 points hit exactly once"};
}

Result public_end_to_end() {
  bench::ExperimentConfig c;
  c.protocol = "public";
  c.k = 64;
  c.ell = 2;
  c.eps = 0.3;
  c.delta = 1.0 / 12.0;
  c.trials = 2000;
  c.master_seed = 8;
  c.constants = calibrated();
  const auto row = bench::run_config(c).front();
  return {row.type1_upper <= 0.12 && row.type2_upper <= 0.12,
          fmt("players %.0f, type I %.4f (upper %.4f), type II %.4f (upper %.4f)",
              row.players_used, row.type1_rate, row.type1_upper, row.type2_rate,
              row.type2_upper)};
}

Result separation() {
  bench::ExperimentConfig c;
  c.k = 16;
  c.ell = 1;
  c.eps = 0.3;
  c.delta = 0.1;
  c.trials = 200;
  c.master_seed = 9;
  c.constants = calibrated();
  const auto sweep = bench::scaling_sweep({"public", "simulate-infer"}, {16, 32, 64}, c, 0.1);
  double pub = 0.0, priv = 0.0;
  for (const auto& [name, s] : sweep.slopes) (name == "public" ? pub : priv) = s;
  bool ordered = true;
  std::string ns;
  for (const auto& a : sweep.points) {
    ns += fmt("%s/%zu=%zu ", a.protocol.c_str(), a.k, a.n_star);
    if (a.protocol != "public") continue;
    for (const auto& b : sweep.points) {
      if (b.protocol == "simulate-infer" && b.k == a.k && !(a.n_star < b.n_star)) ordered = false;
    }
  }
  if (!ns.empty()) ns.pop_back();
  const bool ok = std::abs(pub - 1.0) <= 0.3 && std::abs(priv - 1.5) <= 0.3 && ordered;
  return {ok, fmt("public slope %.3f, simulate-infer slope %.3f, %s", pub, priv, ns.c_str())};
}

double split_cost(std::span<const double> a, const std::vector<double>& b, double t) {
  double l1 = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    l1 += std::abs(a[i] - b[i]);
    l2 += b[i] * b[i];
  }
  return l1 + t * std::sqrt(l2);
}

// Coordinatewise grid on prod [0, a_i], refined around the best point.
double kappa_grid(std::span<const double> a, double t) {
  const std::size_t k = a.size();
  const int half = 6;
  std::vector<double> center(k), step(k), b(k);
  for (std::size_t i = 0; i < k; ++i) {
    center[i] = a[i] / 2.0;
    step[i] = a[i] / (2.0 * half);
  }
  double best = split_cost(a, center, t);
  for (int level = 0; level < 14; ++level) {
    std::vector<double> arg = center;
    std::vector<int> g(k, -half);
    while (true) {
      for (std::size_t i = 0; i < k; ++i) b[i] = std::clamp(center[i] + g[i] * step[i], 0.0, a[i]);
      const double c = split_cost(a, b, t);
      if (c < best) {
        best = c;
        arg = b;
      }
      std::size_t i = 0;
      while (i < k && ++g[i] > half) g[i++] = -half;
      if (i == k) break;
    }
    center = arg;
    for (auto& s : step) s /= 3.0;
  }
  return best;
}

Result kappa_oracle() {
  RngStream r(10, 0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t k = 1 + rep % 4;
    std::vector<double> a(k);
    for (auto& x : a) x = r.uniform();
    const double t = 3.0 * r.uniform();
    worst = std::max(worst, std::abs(kappa(a, t) - kappa_grid(a, t)));
  }
  return {worst <= 1e-3, fmt("50 vectors, max |kappa - grid| = %.2e", worst)};
}

Result amplification() {
  const double th1 = 0.7, th2 = 0.6, delta = 0.05;
  const std::size_t n = amplify_rounds(8.0, delta, th1, th2);
  const std::size_t trials = 10000;
  const RngStream root(11, 0);
  auto run = [&](double accept_prob, bool want_accept, std::uint64_t side) {
    std::size_t errors = 0;
    std::vector<std::uint8_t> bits(n);
    for (std::size_t t = 0; t < trials; ++t) {
      RngStream r = root.child(2 * t + side);
      for (auto& b : bits) b = r.uniform() < accept_prob;
      errors += amplify(bits, th1, th2).accept != want_accept;
    }
    return errors;
  };
  const auto e1 = run(th1, true, 0);
  const auto e2 = run(1.0 - th2, false, 1);
  const auto w1 = wilson_interval(e1, trials), w2 = wilson_interval(e2, trials);
  return {w1.lower <= delta && w2.lower <= delta,
          fmt("N = %zu, null error %.4f (upper %.4f), far error %.4f (upper %.4f)", n,
              static_cast<double>(e1) / trials, w1.upper, static_cast<double>(e2) / trials,
              w2.upper)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Result()>> criteria = {
      exact_simulation, boosted_simulation, flattened_moments, quadruple_sums,
      anticoncentration, goldreich,        fourwise_gf16,     public_end_to_end,
      separation,       kappa_oracle,      amplification};
  std::vector<std::size_t> which;
  if (argc > 1) {
    const long n = std::strtol(argv[1], nullptr, 10);
    if (n < 1 || n > static_cast<long>(criteria.size())) {
      std::fprintf(stderr, "usage: acceptance [1-%zu]\n", criteria.size());
      return 2;
    }
    which.push_back(static_cast<std::size_t>(n));
  } else {
    for (std::size_t i = 1; i <= criteria.size(); ++i) which.push_back(i);
  }
  bool all = true;
  for (std::size_t i : which) {
    const auto start = std::chrono::steady_clock::now();
    Result r{false, ""};
    try {
      r = criteria[i - 1]();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s [%.1f s]\n", r.pass ? "PASS" : "FAIL", i,
                r.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
