#pragma once

// Experiment harness: error-rate estimation with Wilson intervals, minimal
// player-count calibration, and scaling sweeps.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsim/constants.hpp"
#include "dsim/distribution.hpp"

namespace dsim::bench {

/// Recognized protocol names.
inline const std::vector<std::string> kProtocols = {
    "private-sim", "simulate-infer", "public", "public-4wise", "param-identity"};

struct ExperimentConfig {
  std::string protocol = "public";
  std::size_t k = 16;
  unsigned ell = 1;
  double eps = 0.3;
  double delta = 0.1;
  std::size_t trials = 100;
  std::uint64_t master_seed = 1;
  Constants constants;
  std::string output_format = "csv";
  /// Overrides the protocol's own player count when set.
  std::optional<std::size_t> players;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

struct ReportRow {
  ExperimentConfig config;
  double players_used = 0.0;  // mean over trials
  double type1_rate = 0.0;
  double type1_upper = 0.0;
  double type2_rate = 0.0;
  double type2_upper = 0.0;
  double wall_time = 0.0;  // seconds
  nlohmann::json extra = nlohmann::json::object();
};

/// Reference used by every testing protocol: u_k, except param-identity
/// which uses q_i proportional to 1/(i+1).
Distribution reference_instance(const std::string& protocol, std::size_t k);
/// p_i proportional to q_i (1 + s c) with s = +1 on even and -1 on odd
/// indices, c chosen by bisection so that tv(p, q) = eps. Equals the
/// Paninski perturbation when q is uniform.
Distribution far_instance(const Distribution& q, double eps);

/// Estimates Type I (reject under p = q) and Type II (accept under the far
/// instance) error over `trials` trials each. Trial t of the null uses
/// RngStream(seed, 0).child(2t), of the alternative child(2t + 1).
/// For private-sim, type1_rate is the abort rate of the boosted protocol at
/// alpha = delta and extra.conditional_tv the TV between accepted samples
/// and p.
std::vector<ReportRow> run_config(const ExperimentConfig& config, unsigned workers = 0);

struct CalibrationStep {
  std::size_t players;
  double type1_rate, type1_upper, type2_rate, type2_upper;
  bool passed;
};

struct CalibrationResult {
  std::size_t n_star = 0;
  std::vector<CalibrationStep> steps;
};

/// Doubling from a protocol-specific start, then bisection, on the player
/// budget (same seeds at every budget). n_star is the smallest tested budget
/// whose two Wilson upper bounds are at most target_delta. Bisection stops
/// when the bracket is within `rel_tol` of its upper end. Throws
/// std::runtime_error when the budget passes `cap` without success.
CalibrationResult calibrate_min_players(const ExperimentConfig& base, double target_delta,
                                        double rel_tol = 0.05,
                                        std::size_t cap = std::size_t{1} << 36,
                                        unsigned workers = 0);

/// Same search for simulate-and-infer learning of u_k: the failure rate is
/// P[tv(estimate, p) > eps] (reported as type1; type2 is 0).
CalibrationResult calibrate_learning(const ExperimentConfig& base, double target_delta,
                                     double rel_tol = 0.05,
                                     std::size_t cap = std::size_t{1} << 36,
                                     unsigned workers = 0);

struct SweepPoint {
  std::string protocol;
  std::size_t k;
  std::size_t n_star;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<std::pair<std::string, double>> slopes;
};

/// n_star for each protocol and k, with least-squares log-log slopes.
/// Needs at least three distinct k.
SweepResult scaling_sweep(const std::vector<std::string>& protocols,
                          const std::vector<std::size_t>& ks, const ExperimentConfig& base,
                          double target_delta, unsigned workers = 0);

/// CSV header and rows; wall_time is written only when `timing` is set, so
/// that reports are byte-identical across runs by default.
void write_csv(std::ostream& out, const std::vector<ReportRow>& rows, bool timing = false);
nlohmann::json rows_to_json(const std::vector<ReportRow>& rows, bool timing = false);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
nlohmann::json to_json(const CalibrationResult& r);

}  // namespace dsim::bench
