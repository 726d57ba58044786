#include "dsim/smp.hpp"

#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace dsim::smp {

namespace {

std::uint64_t mask_for(unsigned bits) {
  return bits >= 64 ? std::numeric_limits<std::uint64_t>::max()
                    : (std::uint64_t{1} << bits) - 1;
}

std::uint64_t checked(const ProtocolSpec& spec, std::uint64_t word) {
  if ((word & ~mask_for(spec.bits)) != 0) {
    throw std::logic_error("channel produced a message longer than " +
                           std::to_string(spec.bits) + " bits");
  }
  return word;
}

}  // namespace

std::string Message::to_hex() const {
  const unsigned digits = length == 0 ? 1 : (length + 3) / 4;
  std::string out(digits, '0');
  std::uint64_t v = bits;
  for (unsigned i = 0; i < digits; ++i) {
    out[digits - 1 - i] = "0123456789abcdef"[v & 0xF];
    v >>= 4;
  }
  return out;
}

void ProtocolSpec::validate() const {
  if (players == 0) throw std::invalid_argument("protocol needs >= 1 player");
  if (bits == 0 || bits > kMaxMessageBits) {
    throw std::invalid_argument("message length must be in [1, 64] bits");
  }
  if (mode == RandomnessMode::private_coin && public_words != 0) {
    throw std::invalid_argument("private-coin protocol cannot draw public words");
  }
  const bool empty = std::visit([](const auto& f) { return !f; }, channel);
  if (empty) throw std::invalid_argument("protocol channel is empty");
}

std::vector<std::uint64_t> Transcript::words() const {
  std::vector<std::uint64_t> w;
  w.reserve(messages.size());
  for (const auto& m : messages) w.push_back(m.bits);
  return w;
}

std::string Transcript::to_json() const {
  nlohmann::json j;
  j["messages"] = nlohmann::json::array();
  for (const auto& m : messages) j["messages"].push_back(m.to_hex());
  j["public"] = public_realization;
  return j.dump();
}

Transcript run_protocol(const ProtocolSpec& spec, const Distribution& p,
                        RngStream& rng) {
  spec.validate();
  Sampler draw(p);
  std::vector<Symbol> samples(spec.players);
  for (auto& s : samples) s = draw(rng);
  return run_protocol_on_samples(spec, samples, rng);
}

Transcript run_protocol_on_samples(const ProtocolSpec& spec,
                                   std::span<const Symbol> samples,
                                   RngStream& rng) {
  spec.validate();
  if (samples.size() != spec.players) {
    throw std::invalid_argument("need exactly one sample per player");
  }
  Transcript t;
  if (spec.mode == RandomnessMode::public_coin) {
    RngStream shared_rng = rng.child(0);
    t.public_realization.resize(spec.public_words);
    for (auto& w : t.public_realization) w = shared_rng();
  }
  const std::span<const std::uint64_t> shared(t.public_realization);
  t.messages.reserve(spec.players);
  if (const auto* det = std::get_if<DeterministicChannel>(&spec.channel)) {
    for (std::size_t i = 0; i < spec.players; ++i) {
      t.messages.push_back({checked(spec, (*det)(i, samples[i], shared)), spec.bits});
    }
  } else {
    const auto& rnd = std::get<RandomizedChannel>(spec.channel);
    for (std::size_t i = 0; i < spec.players; ++i) {
      RngStream own = rng.child(1 + i);
      t.messages.push_back({checked(spec, rnd(i, samples[i], shared, own)), spec.bits});
    }
  }
  return t;
}

std::uint64_t ProductLaw::atom_count() const {
  std::uint64_t n = 1;
  for (const auto& m : per_player) {
    if (m.empty()) return 0;
    if (n > std::numeric_limits<std::uint64_t>::max() / m.size()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    n *= m.size();
  }
  return n;
}

ProductLaw message_laws(const ProtocolSpec& spec, const Distribution& p,
                        std::span<const std::uint64_t> shared) {
  spec.validate();
  const auto* det = std::get_if<DeterministicChannel>(&spec.channel);
  if (det == nullptr) {
    throw std::invalid_argument(
        "exact enumeration requires deterministic player channels");
  }
  if (spec.mode == RandomnessMode::private_coin) shared = {};
  ProductLaw law;
  law.per_player.reserve(spec.players);
  for (std::size_t i = 0; i < spec.players; ++i) {
    std::map<std::uint64_t, double> acc;
    for (Symbol x = 0; x < p.size(); ++x) {
      if (p[x] > 0.0) acc[checked(spec, (*det)(i, x, shared))] += p[x];
    }
    law.per_player.emplace_back(acc.begin(), acc.end());
  }
  return law;
}

ProductLaw apply_kernel(const ProductLaw& law, const MessageKernel& kernel) {
  ProductLaw out;
  out.per_player.reserve(law.per_player.size());
  for (std::size_t i = 0; i < law.per_player.size(); ++i) {
    std::map<std::uint64_t, double> acc;
    for (const auto& [msg, prob] : law.per_player[i]) {
      for (const auto& [to, w] : kernel(i, msg)) {
        if (w > 0.0) acc[to] += prob * w;
      }
    }
    out.per_player.emplace_back(acc.begin(), acc.end());
  }
  return out;
}

void for_each_transcript(
    const ProductLaw& law,
    const std::function<void(std::span<const std::uint64_t>, double)>& visit,
    std::uint64_t cap) {
  const std::uint64_t atoms = law.atom_count();
  if (atoms > cap) {
    throw std::length_error("transcript enumeration needs " +
                            std::to_string(atoms) + " atoms, above the cap of " +
                            std::to_string(cap));
  }
  const std::size_t n = law.per_player.size();
  if (atoms == 0) return;
  // Odometer over the per-player supports with running prefix products.
  std::vector<std::size_t> digit(n, 0);
  std::vector<std::uint64_t> words(n);
  std::vector<double> prefix(n + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    words[i] = law.per_player[i][0].first;
    prefix[i + 1] = prefix[i] * law.per_player[i][0].second;
  }
  while (true) {
    visit(words, prefix[n]);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++digit[i] < law.per_player[i].size()) break;
      digit[i] = 0;
      if (i == 0) return;
    }
    if (n == 0) return;
    for (std::size_t j = i; j < n; ++j) {
      const auto& [w, pr] = law.per_player[j][digit[j]];
      words[j] = w;
      prefix[j + 1] = prefix[j] * pr;
    }
  }
}

TranscriptDistribution enumerate_transcripts(const ProtocolSpec& spec,
                                             const Distribution& p,
                                             std::span<const std::uint64_t> shared,
                                             std::uint64_t cap) {
  if (spec.mode == RandomnessMode::public_coin && shared.size() != spec.public_words) {
    throw std::invalid_argument(
        "public-coin enumeration needs the full shared realization");
  }
  const ProductLaw law = message_laws(spec, p, shared);
  TranscriptDistribution out;
  for_each_transcript(
      law,
      [&](std::span<const std::uint64_t> w, double pr) {
        out[std::vector<std::uint64_t>(w.begin(), w.end())] += pr;
      },
      cap);
  return out;
}

}  // namespace dsim::smp
