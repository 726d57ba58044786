#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "dsim/bench.hpp"
#include "dsim/gf2m.hpp"
#include "dsim/public_coin.hpp"
#include "dsim/stats.hpp"

using namespace dsim;

namespace {

// Fraction of balanced labelings of [k] into L parts with Y_0 = Y_1, by
// enumerating every distinct permutation of the label multiset.
double enumerate_collision(std::size_t k, std::size_t L) {
  std::vector<int> labels(k);
  for (std::size_t i = 0; i < k; ++i) labels[i] = static_cast<int>(i / (k / L));
  std::size_t total = 0, same = 0;
  do {
    ++total;
    same += labels[0] == labels[1];
  } while (std::next_permutation(labels.begin(), labels.end()));
  return static_cast<double>(same) / static_cast<double>(total);
}

Distribution random_dist(std::size_t k, RngStream& r) {
  std::vector<double> w(k);
  double s = 0.0;
  for (auto& x : w) s += x = r.uniform() < 0.2 ? 0.0 : r.uniform();
  if (s == 0.0) return Distribution::uniform(k);
  for (auto& x : w) x /= s;
  return Distribution(w);
}

}  // namespace

TEST_CASE("balanced partitions") {
  RngStream r(1, 1);
  const auto one = random_balanced_partition(6, 1, r);
  for (auto y : one.labels) CHECK(y == 0);
  auto perm = random_balanced_partition(6, 6, r).labels;
  std::sort(perm.begin(), perm.end());
  CHECK(perm == std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS_AS(random_balanced_partition(6, 4, r), std::invalid_argument);

  CHECK(enumerate_collision(8, 4) == doctest::Approx(1.0 / 7));
  CHECK(enumerate_collision(4, 2) == doctest::Approx(1.0 / 3));
  const std::size_t n = 1000000;
  std::size_t same = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto p = random_balanced_partition(8, 4, r);
    same += p.labels[0] == p.labels[1];
  }
  const double pr = 1.0 / 7;
  CHECK(std::abs(static_cast<double>(same) / n - pr) <= 4 * std::sqrt(pr * (1 - pr) / n));
}

TEST_CASE("induced distributions") {
  PartitionAssignment part{{0, 1, 0, 1}, 2, true};
  const auto img = induced(Distribution({0.1, 0.2, 0.3, 0.4}), part);
  CHECK(img[0] == doctest::Approx(0.4));
  CHECK(img[1] == doctest::Approx(0.6));
  RngStream r(2, 2);
  const auto bp = random_balanced_partition(12, 4, r);
  const auto u = induced(Distribution::uniform(12), bp);
  for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(induced(Distribution::uniform(3), part), std::invalid_argument);
}

TEST_CASE("Goldreich reduction") {
  const auto single = GoldreichMap(Distribution({1.0})).pushforward(Distribution({1.0}));
  CHECK(single.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(single[i] == doctest::Approx(0.2).epsilon(1e-12));

  RngStream r(3, 3);
  for (int it = 0; it < 100; ++it) {
    const std::size_t k = 1 + r.below(10);
    const auto q = random_dist(k, r);
    const GoldreichMap g(q);
    const auto img = g.pushforward(q);
    for (std::size_t i = 0; i < img.size(); ++i) {
      CHECK(std::abs(img[i] - 1.0 / (5.0 * k)) <= 1e-9);
    }
    std::size_t covered = g.leftover_size();
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(g.block_size(i) >= 1);
      covered += g.block_size(i);
    }
    CHECK(covered == 5 * k);
  }

  const GoldreichMap u4(Distribution::uniform(4));
  const auto far = u4.pushforward(Distribution({0.7, 0.1, 0.1, 0.1}));
  CHECK(tv_distance(far, Distribution::uniform(20)) >= 16 * 0.3 / 25);

  // a larger target keeps the exact uniform image
  const auto q = Distribution({0.5, 0.25, 0.25});
  const GoldreichMap padded(q, 16);
  const auto img = padded.pushforward(q);
  for (std::size_t i = 0; i < 16; ++i) CHECK(img[i] == doctest::Approx(1.0 / 16));
  CHECK_THROWS_AS(GoldreichMap(q, 14), std::invalid_argument);
}

TEST_CASE("Goldreich sampling path has the pushforward law") {
  const Distribution q({0.6, 0.3, 0.1});
  const Distribution p({0.2, 0.2, 0.6});
  const GoldreichMap g(q);
  const auto law = g.pushforward(p);
  std::vector<double> counts(g.target_size(), 0.0);
  RngStream r(4, 4);
  Sampler draw(p);
  const std::size_t n = 400000;
  for (std::size_t t = 0; t < n; ++t) counts[g.sample(draw(r), r)] += 1.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double pi = law[i];
    CHECK(std::abs(counts[i] / n - pi) <= 4.5 * std::sqrt(pi * (1 - pi) / n) + 1e-12);
  }
}

TEST_CASE("l2 identity statistic") {
  const std::vector<double> q = {0.25, 0.25, 0.25, 0.25};
  const std::vector<double> p = {0.35, 0.15, 0.25, 0.25};
  const double m = 200.0;
  double l2sq = 0.0;
  for (std::size_t i = 0; i < 4; ++i) l2sq += (p[i] - q[i]) * (p[i] - q[i]);
  RngStream r(5, 5);
  RunningStats s;
  for (int t = 0; t < 100000; ++t) {
    std::vector<std::uint64_t> c(4);
    for (std::size_t i = 0; i < 4; ++i) c[i] = std::poisson_distribution<std::uint64_t>(m * p[i])(r);
    s.add(l2_identity_test(c, q, m, 0.1).statistic / (m * m));
  }
  CHECK(std::abs(s.mean() - l2sq) <= 4 * s.std_error());

  const std::vector<std::uint64_t> exact = {50, 50, 50, 50};
  const auto v = l2_identity_test(exact, q, m, 0.1);
  CHECK(v.statistic == doctest::Approx(-200.0));
  CHECK(v.accept);
  CHECK_THROWS_AS(l2_identity_test(exact, q, NAN, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(l2_identity_test(exact, std::vector<double>{0.5, 0.5}, m, 0.1),
                  std::invalid_argument);
  CHECK(l2_sample_size(1.0, 0.5, 0.1, std::exp(-2.0)) == 100);
}

TEST_CASE("l2 test error rates at gamma' and 2 gamma'") {
  const std::size_t L = 4;
  const std::vector<double> q(L, 0.25);
  const double gp = 0.05, dp = 0.1;
  const double m = std::ceil(4.0 * 0.5 / (gp * gp) * std::log(1 / dp));
  std::vector<double> far = {0.25 + gp, 0.25 - gp, 0.25 + gp, 0.25 - gp};  // |p - q|_2 = 2 gp
  RngStream r(6, 6);
  int null_rej = 0, far_acc = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<std::uint64_t> a(L), b(L);
    for (std::size_t i = 0; i < L; ++i) {
      a[i] = std::poisson_distribution<std::uint64_t>(m * q[i])(r);
      b[i] = std::poisson_distribution<std::uint64_t>(m * far[i])(r);
    }
    null_rej += !l2_identity_test(a, q, m, gp).accept;
    far_acc += l2_identity_test(b, q, m, gp).accept;
  }
  CHECK(null_rej <= dp * 10000);
  CHECK(far_acc <= dp * 10000);
}

TEST_CASE("amplification") {
  const std::vector<std::uint8_t> ones(10, 1);
  CHECK(amplify(ones, 0.7, 0.6).accept);
  CHECK(amplify(ones, 0.7, 0.6).threshold == doctest::Approx(0.55));
  CHECK_THROWS_AS(amplify(ones, 0.3, 0.6), std::invalid_argument);
  const auto n = amplify_rounds(8.0, 0.05, 0.7, 0.6);
  CHECK(n == static_cast<std::size_t>(std::ceil(8 * std::log2(20.0) / 0.09)));
  RngStream r(7, 7);
  int acc_hi = 0, acc_lo = 0;
  for (int t = 0; t < 10000; ++t) {
    std::vector<std::uint8_t> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = r.bernoulli(0.7);
      b[i] = r.bernoulli(0.4);
    }
    acc_hi += amplify(a, 0.7, 0.6).accept;
    acc_lo += amplify(b, 0.7, 0.6).accept;
  }
  CHECK(acc_hi >= 0.95 * 10000);
  CHECK(10000 - acc_lo >= 0.95 * 10000);
}

TEST_CASE("plans") {
  Constants c;
  for (double cc : {1.0 / 82, 0.25, 1.0, 2.0}) {
    c.c = cc;
    const auto a = plan_public_test(64, 2, 0.3, 0.1, false, c);
    CHECK(a.theta1 > 1 - a.theta2);
    CHECK(a.delta_prime == doctest::Approx(cc / (2 * (1 + cc))));
    CHECK(a.domain == 320);
    const auto b = plan_public_test(64, 2, 0.3, 0.1, true, c);
    CHECK(b.theta1 > 1 - b.theta2);
    CHECK(b.theta1 == doctest::Approx((cc * cc - 2 * cc + 8) / (4 * (cc + 2))));
    CHECK(b.delta_prime == doctest::Approx(cc / (2 + cc)));
  }
  c = Constants{};
  c.C_blk = 2.0;
  const auto p = plan_public_test(6, 3, 0.5, 0.1, false, c);
  CHECK(p.domain == 32);  // 30 padded up to a multiple of 8
  CHECK(p.block_mean == std::ceil(2.0 * 6 / (std::sqrt(8.0) * 0.25)));
  CHECK(p.gamma_prime == doctest::Approx(0.5 / std::sqrt(60.0)));
  CHECK(with_player_budget(p, 10 * p.blocks).block_mean == doctest::Approx(10.0));
  CHECK_THROWS_AS(plan_public_test(6, 0, 0.5, 0.1, false, c), std::invalid_argument);
}

TEST_CASE("public-coin tester separates null and far instances") {
  Constants c;
  c.c = 0.75;
  c.C_amp = 1.0;
  c.C_blk = 20.0;
  const auto q = Distribution::uniform(16);
  const auto far = paninski_family(16, 0.3);
  int null_rej = 0, far_acc = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    DistributionSource a(q, RngStream(8, 2 * t)), b(far, RngStream(8, 2 * t + 1));
    RngStream ra(9, 2 * t), rb(9, 2 * t + 1);
    null_rej += !public_identity_test(q, 2, 0.3, 0.1, a, ra, c).verdict.accept;
    far_acc += public_identity_test(q, 2, 0.3, 0.1, b, rb, c).verdict.accept;
  }
  CHECK(null_rej <= 10);
  CHECK(far_acc <= 10);

  DistributionSource tiny(q, RngStream(1, 1), 5);
  RngStream r(1, 2);
  CHECK_THROWS_AS(public_identity_test(q, 1, 0.3, 0.1, tiny, r, c), InsufficientSamples);
}

TEST_CASE("four-wise variant: gate, coins, and norm of the induced reference") {
  const auto uL = Distribution::uniform(4);
  CHECK(uL.l2_norm() <= 2.0 / std::sqrt(4.0));
  const auto point = Distribution::point_mass(8, 0);
  CHECK(point.l2_norm() > 2.0 / std::sqrt(8.0));

  Constants c;
  c.c = 1.0;
  c.C_amp = 1.0;
  c.C_blk = 2.0;
  const auto q = Distribution::uniform(12);
  DistributionSource src(q, RngStream(10, 0));
  RngStream r(10, 1);
  const auto rep = public_identity_test_efficient(q, 2, 0.3, 0.1, src, r, c);
  const auto plan = plan_public_test(12, 2, 0.3, 0.1, true, c);
  CHECK(rep.public_coins == plan.blocks * 4 * (6 + 2));
  CHECK(rep.public_coins == plan.blocks * gf::fourwise_seed_bits(60, 2));

  // E |q~|_2^2 = 1/(5k) + (5k - 1)/(5k L) over random 4-wise partitions of [5k]
  const std::size_t k5 = 40, L = 4;
  const auto u = Distribution::uniform(k5);
  const std::size_t bits = gf::fourwise_seed_bits(k5, 2);
  RunningStats s;
  RngStream seeds(11, 0);
  for (int t = 0; t < 100000; ++t) {
    CountingCoins coins(seeds.child(t));
    std::vector<std::uint8_t> seed(bits);
    for (auto& b : seed) b = coins.bit();
    const auto qt = induced(u, fourwise_assignment(k5, 2, seed));
    s.add(qt.l2_norm() * qt.l2_norm());
  }
  const double expect = 1.0 / k5 + (k5 - 1.0) / (k5 * L);
  CHECK(std::abs(s.mean() - expect) <= 4 * s.std_error());
}
