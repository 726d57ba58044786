#include "dsim/gf2m.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace dsim::gf {

namespace {

// Low-weight irreducible polynomials, index m.
constexpr std::array<std::uint64_t, kMaxDegree + 1> kModuli = {
    0x0,        0x3,        0x7,        0xB,         0x13,       0x25,
    0x43,       0x83,       0x11D,      0x211,       0x409,      0x805,
    0x1053,     0x201B,     0x4443,     0x8003,      0x1100B,    0x20009,
    0x40081,    0x80027,    0x100009,   0x200005,    0x400003,   0x800021,
    0x1000087,  0x2000009,  0x4000047,  0x8000027,   0x10000009, 0x20000005,
    0x40800007, 0x80000009, 0x100400007};

int degree_of(std::uint64_t a) { return a == 0 ? -1 : 63 - std::countl_zero(a); }

std::uint64_t poly_mod(std::uint64_t a, std::uint64_t b) {
  const int db = degree_of(b);
  for (int da = degree_of(a); da >= db; da = degree_of(a)) a ^= b << (da - db);
  return a;
}

std::uint64_t poly_gcd(std::uint64_t a, std::uint64_t b) {
  while (b != 0) {
    a = poly_mod(a, b);
    std::swap(a, b);
  }
  return a;
}

}  // namespace

std::uint64_t modulus(unsigned m) {
  if (m == 0 || m > kMaxDegree) {
    throw std::invalid_argument("GF(2^m): degree " + std::to_string(m) +
                                " outside [1, 32]");
  }
  return kModuli[m];
}

std::uint64_t clmul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  while (b != 0) {
    if (b & 1) r ^= a;
    a <<= 1;
    b >>= 1;
  }
  return r;
}

std::uint64_t reduce(std::uint64_t a, std::uint64_t mod) { return poly_mod(a, mod); }

Field::Field(unsigned m) : m_(m), mod_(gf::modulus(m)) {}

std::uint64_t Field::eval(std::span<const std::uint64_t> coefficients,
                          std::uint64_t x) const {
  std::uint64_t r = 0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
    r = mul(r, x) ^ *it;
  }
  return r;
}

bool is_irreducible(std::uint64_t poly) {
  const int n = degree_of(poly);
  if (n < 1 || n > static_cast<int>(kMaxDegree)) return false;
  // f is irreducible iff gcd(x^(2^i) - x, f) = 1 for i = 1..n/2.
  std::uint64_t power = 2;  // x
  for (int i = 1; i <= n / 2; ++i) {
    power = poly_mod(clmul(power, power), poly);
    if (poly_gcd(poly, power ^ 2) != 1) return false;
  }
  return true;
}

std::size_t fourwise_seed_bits(std::size_t k_prime, unsigned ell) {
  if (k_prime == 0) throw std::invalid_argument("fourwise: k' must be positive");
  const unsigned lg = k_prime <= 1 ? 0u : static_cast<unsigned>(std::bit_width(k_prime - 1));
  return 4 * static_cast<std::size_t>(lg + ell);
}

FourwiseLabels fourwise_labels(std::size_t k_prime, unsigned ell,
                               std::span<const std::uint8_t> seed) {
  const std::size_t need = fourwise_seed_bits(k_prime, ell);
  if (seed.size() != need) {
    throw std::invalid_argument("fourwise: seed has " + std::to_string(seed.size()) +
                                " bits, expected " + std::to_string(need));
  }
  const unsigned m = static_cast<unsigned>(need / 4);
  if (m == 0) throw std::invalid_argument("fourwise: field degree would be 0");
  const Field field(m);
  std::array<std::uint64_t, 4> coef{};
  for (std::size_t b = 0; b < need; ++b) {
    if (seed[b] > 1) throw std::invalid_argument("fourwise: seed entries must be bits");
    coef[b / m] |= std::uint64_t{seed[b]} << (b % m);
  }
  FourwiseLabels out;
  out.field_degree = m;
  out.labels.resize(k_prime);
  for (std::size_t i = 0; i < k_prime; ++i) {
    out.labels[i] = static_cast<std::uint32_t>(field.eval(coef, i) >> (m - ell));
  }
  return out;
}

}  // namespace dsim::gf
