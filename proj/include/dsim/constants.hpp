#pragma once

// Hidden constants of the protocols, loadable from JSON so that calibrated
// values can be checked in and reused.

#include <cstdint>
#include <string>

#include <json.hpp>

namespace dsim {

struct Constants {
  /// Block-level anticoncentration constant of the public-coin tester.
  double c = 1.0 / 82.0;
  /// Block size multiplier: m = C_blk k / (2^(l/2) eps^2).
  double C_blk = 1.0;
  /// Amplification rounds multiplier: N = C_amp log2(1/delta) / gap^2.
  double C_amp = 2.0;
  /// l2 tester multiplier: m >= C_l2 |q|_2 / gamma'^2 log(1/delta').
  double C_l2 = 1.0;
  /// Player-count multipliers for simulate-and-infer learning / testing.
  double c_L = 1.0;
  double c_T = 1.0;
  /// Seed of the calibration run that produced these values (0 if none).
  std::uint64_t seed = 0;
};

/// Missing keys keep their defaults; unknown keys and non-positive values
/// throw std::invalid_argument naming the key.
Constants constants_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Constants& c);

Constants load_constants(const std::string& path);
void save_constants(const Constants& c, const std::string& path);

/// Sets one named constant ("c", "C_blk", "C_amp", "C_l2", "c_L", "c_T").
void set_constant(Constants& c, const std::string& name, double value);

}  // namespace dsim
