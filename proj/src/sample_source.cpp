#include "dsim/sample_source.hpp"

#include <algorithm>
#include <string>

namespace dsim {

void DistributionSource::fill(std::span<Symbol> out) {
  if (out.size() > remaining_) {
    throw InsufficientSamples("sample source exhausted: requested " +
                              std::to_string(out.size()) + ", remaining " +
                              std::to_string(remaining_));
  }
  if (remaining_ != kUnbounded) remaining_ -= out.size();
  for (auto& s : out) s = sampler_(rng_);
}

SequenceSource::SequenceSource(std::vector<Symbol> samples, std::size_t k)
    : samples_(std::move(samples)), k_(k) {
  if (std::any_of(samples_.begin(), samples_.end(),
                  [k](Symbol s) { return s >= k; })) {
    throw std::invalid_argument("SequenceSource: sample outside alphabet");
  }
}

void SequenceSource::fill(std::span<Symbol> out) {
  if (out.size() > remaining()) {
    throw InsufficientSamples("sample sequence exhausted: requested " +
                              std::to_string(out.size()) + ", remaining " +
                              std::to_string(remaining()));
  }
  std::copy_n(samples_.begin() + static_cast<std::ptrdiff_t>(pos_), out.size(),
              out.begin());
  pos_ += out.size();
}

}  // namespace dsim
