#pragma once

// Arithmetic in GF(2^m), m <= 32, and the 4-wise independent labelling built
// from random cubic polynomials over it.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dsim::gf {

inline constexpr unsigned kMaxDegree = 32;

/// Irreducible modulus of degree m including the x^m term, e.g. 0x13 for
/// x^4 + x + 1. Throws for m outside [1, 32].
std::uint64_t modulus(unsigned m);

/// Carry-less product of two words below 2^32.
std::uint64_t clmul(std::uint64_t a, std::uint64_t b);
/// Remainder of a modulo the polynomial `mod` (with its leading bit set).
std::uint64_t reduce(std::uint64_t a, std::uint64_t mod);

class Field {
 public:
  explicit Field(unsigned m);

  unsigned degree() const noexcept { return m_; }
  std::uint64_t size() const noexcept { return std::uint64_t{1} << m_; }
  std::uint64_t modulus() const noexcept { return mod_; }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const { return a ^ b; }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return reduce(clmul(a, b), mod_);
  }
  /// Horner evaluation; coefficients[j] multiplies x^j.
  std::uint64_t eval(std::span<const std::uint64_t> coefficients, std::uint64_t x) const;

 private:
  unsigned m_;
  std::uint64_t mod_;
};

/// Polynomial irreducibility over GF(2) (Ben-Or); used to check the table.
bool is_irreducible(std::uint64_t poly);

/// Labels in [2^l] for points 0..k'-1 of GF(2^m), m = ceil(log2 k') + l.
struct FourwiseLabels {
  std::vector<std::uint32_t> labels;
  unsigned field_degree = 0;
};

/// Number of seed bits fourwise_labels consumes: 4 (ceil(log2 k') + l).
std::size_t fourwise_seed_bits(std::size_t k_prime, unsigned ell);

/// seed holds one bit per entry (0 or 1); the j-th group of m bits, least
/// significant first, is the coefficient of x^j. Label of point i is the top
/// l bits of P(i). Throws on a seed of the wrong length.
FourwiseLabels fourwise_labels(std::size_t k_prime, unsigned ell,
                               std::span<const std::uint8_t> seed);

}  // namespace dsim::gf
