#include "dsim/dist_sim.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsim::sim {

namespace {

unsigned ceil_log2(std::size_t k) {
  return k <= 1 ? 0u : static_cast<unsigned>(std::bit_width(k - 1));
}

}  // namespace

BlockLayout::BlockLayout(std::size_t k, unsigned bits) : k_(k), bits_(bits) {
  if (k == 0) throw std::invalid_argument("BlockLayout: k must be positive");
  if (bits == 0 || bits > 32) {
    throw std::invalid_argument("BlockLayout: bits must be in [1, 32]");
  }
  capacity_ = (std::size_t{1} << bits) - 1;
  parts_ = (k + capacity_ - 1) / capacity_;
}

std::size_t BlockLayout::part_size(std::size_t j) const {
  if (j >= parts_) throw std::out_of_range("BlockLayout: part index");
  const std::size_t begin = j * capacity_;
  return std::min(capacity_, k_ - begin);
}

Symbol BlockLayout::decode(std::size_t part, std::uint64_t code) const {
  if (code == 0 || code > part_size(part)) {
    throw std::invalid_argument("BlockLayout: code " + std::to_string(code) +
                                " is not used by part " + std::to_string(part));
  }
  return part * capacity_ + static_cast<std::size_t>(code - 1);
}

std::vector<Symbol> BlockLayout::part_members(std::size_t j) const {
  std::vector<Symbol> out(part_size(j));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = j * capacity_ + i;
  return out;
}

std::vector<double> BlockLayout::part_masses(const Distribution& p) const {
  if (p.size() != k_) {
    throw std::invalid_argument("BlockLayout: layout is for k=" +
                                std::to_string(k_) + ", distribution has k=" +
                                std::to_string(p.size()));
  }
  std::vector<double> mass(parts_, 0.0);
  for (Symbol x = 0; x < k_; ++x) mass[part_of(x)] += p[x];
  return mass;
}

smp::ProtocolSpec basic_protocol(std::size_t k) {
  smp::ProtocolSpec spec;
  spec.players = 2 * k;
  spec.bits = 1;
  spec.channel = smp::DeterministicChannel(
      [](std::size_t t, Symbol x, std::span<const std::uint64_t>) -> std::uint64_t {
        return x == t / 2 ? 1 : 0;
      });
  return spec;
}

smp::ProtocolSpec block_protocol(const BlockLayout& layout) {
  smp::ProtocolSpec spec;
  spec.players = 4 * layout.parts();
  spec.bits = layout.bits();
  spec.channel = smp::DeterministicChannel(
      [layout](std::size_t t, Symbol x, std::span<const std::uint64_t>) {
        return layout.encode(block_player_part(layout, t), x);
      });
  return spec;
}

SimulationOutcome decode_pairs(std::span<const std::uint64_t> messages,
                               const BlockLayout& layout) {
  std::size_t hit = messages.size();
  for (std::size_t t = 0; t < messages.size(); t += 2) {
    if (messages[t] != 0) {
      if (hit != messages.size()) return SimulationOutcome::abort();
      hit = t;
    }
  }
  if (hit == messages.size() || hit + 1 >= messages.size() ||
      messages[hit + 1] != 0) {
    return SimulationOutcome::abort();
  }
  const std::size_t part = (hit / 2) % layout.parts();
  return SimulationOutcome::symbol(layout.decode(part, messages[hit]));
}

smp::MessageLaw flip_kernel(std::size_t, std::uint64_t message) {
  if (message == 0) return {{0, 1.0}};
  return {{message, 0.5}, {0, 0.5}};
}

SimulationOutcome basic_sim_1bit(const Distribution& p, RngStream& rng) {
  const BlockLayout layout(p.size(), 1);
  Sampler draw(p);
  std::vector<std::uint64_t> msgs(2 * p.size());
  for (std::size_t t = 0; t < msgs.size(); ++t) {
    msgs[t] = layout.encode(t / 2, draw(rng));
  }
  return decode_pairs(msgs, layout);
}

SimulationOutcome enhanced_sim_1bit(const Distribution& p, RngStream& rng) {
  return block_sim(p, BlockLayout(p.size(), 1), rng);
}

SimulationOutcome block_sim(const Distribution& p, const BlockLayout& layout,
                            RngStream& rng) {
  if (p.size() != layout.alphabet_size()) {
    throw std::invalid_argument("block_sim: layout/alphabet mismatch");
  }
  Sampler draw(p);
  std::vector<Symbol> samples(4 * layout.parts());
  for (auto& s : samples) s = draw(rng);
  std::vector<std::uint64_t> scratch;
  return run_block(layout, samples, rng, scratch);
}

std::size_t boost_groups(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  return 10 * static_cast<std::size_t>(std::ceil(std::log2(1.0 / alpha)));
}

std::size_t full_sim_players(std::size_t k, unsigned bits, double alpha) {
  const std::size_t groups = boost_groups(alpha);
  if (bits >= ceil_log2(k)) return 1;
  return groups * 4 * BlockLayout(k, bits).parts();
}

SimulationReport full_sim(const Distribution& p, unsigned bits, double alpha,
                          RngStream& rng) {
  const std::size_t groups = boost_groups(alpha);
  SimulationReport report;
  if (bits >= ceil_log2(p.size())) {
    // One player sends its sample verbatim.
    report.players_used = 1;
    report.groups_used = 0;
    report.outcome = SimulationOutcome::symbol(Sampler(p)(rng));
    return report;
  }
  const BlockLayout layout(p.size(), bits);
  report.players_used = groups * 4 * layout.parts();
  for (std::size_t g = 0; g < groups; ++g) {
    RngStream group_rng = rng.child(g);
    const auto out = block_sim(p, layout, group_rng);
    if (!out.aborted()) {
      report.outcome = out;
      report.groups_used = g + 1;
      return report;
    }
  }
  report.groups_used = groups;
  return report;
}

namespace {

ExactLaw enumerate_law(const smp::ProductLaw& law, const BlockLayout& layout,
                       std::uint64_t cap) {
  ExactLaw out;
  out.output.assign(layout.alphabet_size(), 0.0);
  smp::for_each_transcript(
      law,
      [&](std::span<const std::uint64_t> words, double prob) {
        const auto o = decode_pairs(words, layout);
        if (!o.aborted()) out.output[o.value()] += prob;
      },
      cap);
  for (double x : out.output) out.success += x;
  return out;
}

}  // namespace

std::vector<double> ExactLaw::conditional() const {
  if (!(success > 0.0)) throw std::domain_error("ExactLaw: protocol never succeeds");
  std::vector<double> c(output);
  for (double& x : c) x /= success;
  return c;
}

ExactLaw exact_basic_law(const Distribution& p, std::uint64_t cap) {
  const BlockLayout layout(p.size(), 1);
  return enumerate_law(smp::message_laws(basic_protocol(p.size()), p), layout, cap);
}

ExactLaw exact_block_law(const Distribution& p, const BlockLayout& layout,
                         std::uint64_t cap) {
  const auto law = smp::apply_kernel(smp::message_laws(block_protocol(layout), p), flip_kernel);
  return enumerate_law(law, layout, cap);
}

double basic_success_prob(const Distribution& p) {
  double r = 1.0;
  for (double x : p.probs()) r *= 1.0 - x;
  return r;
}

double success_prob_exact(const Distribution& p, const BlockLayout& layout) {
  double r = 1.0;
  for (double m : layout.part_masses(p)) {
    const double f = 1.0 - m / 2.0;
    r *= f * f;
  }
  return r;
}

}  // namespace dsim::sim
