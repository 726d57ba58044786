#include "dsim/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dsim/dist_sim.hpp"
#include "dsim/param_identity.hpp"
#include "dsim/public_coin.hpp"
#include "dsim/rng.hpp"
#include "dsim/sample_source.hpp"
#include "dsim/simulate_infer.hpp"
#include "dsim/stats.hpp"

namespace dsim::bench {

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw std::invalid_argument("config field '" + field + "' " + why);
}

struct TrialOutcome {
  bool accept = false;
  std::size_t players = 0;
};

std::size_t default_players(const ExperimentConfig& c) {
  if (c.protocol == "simulate-infer") {
    InferenceTask t;
    t.kind = TaskKind::identity;
    t.k = c.k;
    t.eps = c.eps;
    t.delta = c.delta;
    return required_players(t, c.ell, {c.constants.c_L, c.constants.c_T});
  }
  return 0;
}

TrialOutcome run_trial(const ExperimentConfig& c, const Distribution& q,
                       const Distribution& p, std::optional<std::size_t> budget,
                       const RngStream& trial) {
  DistributionSource src(p, trial.child(0));
  RngStream rng = trial.child(1);
  TrialOutcome out;
  if (c.protocol == "simulate-infer") {
    const std::size_t n = budget ? *budget : default_players(c);
    const std::size_t big_n = centralized_samples_for_budget(n, c.k, c.ell, c.delta);
    if (big_n < 2) {
      out.accept = true;
      return out;
    }
    InferenceTask t;
    t.kind = TaskKind::identity;
    t.k = c.k;
    t.eps = c.eps;
    t.delta = c.delta;
    t.reference = q;
    t.centralized_samples = big_n;
    t.overshoot = InferenceTask::hoeffding_overshoot(big_n, c.delta);
    const auto res = std::get<TestingResult>(simulate_and_infer(t, c.ell, src, rng));
    out.accept = res.verdict.accept;
    out.players = simulation_players(t, c.ell);
    return out;
  }
  if (c.protocol == "public" || c.protocol == "public-4wise") {
    auto plan = plan_public_test(c.k, c.ell, c.eps, c.delta, c.protocol == "public-4wise",
                                 c.constants);
    if (budget) plan = with_player_budget(plan, *budget);
    const auto rep = run_public_test(plan, q, src, rng);
    out.accept = rep.verdict.accept;
    out.players = rep.players_used;
    return out;
  }
  if (c.protocol == "param-identity") {
    const auto rep = parameterized_identity_protocol(
        q, c.eps, balanced_runner(c.ell, c.delta, c.constants), src, rng);
    out.accept = rep.verdict.accept;
    out.players = rep.inner.players_used;
    return out;
  }
  throw std::invalid_argument("config field 'protocol' has no testing runner: " + c.protocol);
}

struct ErrorRates {
  std::size_t type1 = 0, type2 = 0, trials = 0;
  double players = 0.0;
};

ErrorRates estimate(const ExperimentConfig& c, std::optional<std::size_t> budget,
                    unsigned workers) {
  const Distribution q = reference_instance(c.protocol, c.k);
  const Distribution far = far_instance(q, c.eps);
  const RngStream root(c.master_seed, 0);
  auto outcomes = run_trials(
      2 * c.trials,
      [&](std::size_t i) {
        const bool alt = i % 2 == 1;
        return run_trial(c, q, alt ? far : q, budget, root.child(i));
      },
      workers);
  ErrorRates e;
  e.trials = c.trials;
  double players = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const bool alt = i % 2 == 1;
    if (!alt && !outcomes[i].accept) ++e.type1;
    if (alt && outcomes[i].accept) ++e.type2;
    players += static_cast<double>(outcomes[i].players);
  }
  e.players = players / static_cast<double>(outcomes.size());
  return e;
}

ReportRow private_sim_row(const ExperimentConfig& c, unsigned workers) {
  const Distribution p = far_instance(Distribution::uniform(c.k), c.eps);
  const RngStream root(c.master_seed, 0);
  auto outs = run_trials(
      c.trials,
      [&](std::size_t i) {
        RngStream r = root.child(i);
        return sim::full_sim(p, c.ell, c.delta, r);
      },
      workers);
  ReportRow row;
  row.config = c;
  std::vector<double> counts(c.k, 0.0);
  std::size_t aborts = 0;
  double players = 0.0;
  for (const auto& o : outs) {
    players += static_cast<double>(o.players_used);
    if (o.outcome.aborted()) {
      ++aborts;
    } else {
      counts[o.outcome.value()] += 1.0;
    }
  }
  const std::size_t accepted = c.trials - aborts;
  row.players_used = players / static_cast<double>(c.trials);
  row.type1_rate = static_cast<double>(aborts) / static_cast<double>(c.trials);
  row.type1_upper = wilson_interval(aborts, c.trials).upper;
  row.type2_rate = 0.0;
  row.type2_upper = 0.0;
  if (accepted > 0) {
    for (double& x : counts) x /= static_cast<double>(accepted);
    row.extra["conditional_tv"] = tv_distance(Distribution(counts), p);
  }
  row.extra["accepted"] = accepted;
  return row;
}

template <class Estimate>
CalibrationResult search_budget(std::size_t start, double target, double rel_tol,
                                std::size_t cap, Estimate&& estimate_at) {
  CalibrationResult result;
  auto test = [&](std::size_t n) {
    const ErrorRates e = estimate_at(n);
    CalibrationStep s;
    s.players = n;
    s.type1_rate = static_cast<double>(e.type1) / static_cast<double>(e.trials);
    s.type2_rate = static_cast<double>(e.type2) / static_cast<double>(e.trials);
    s.type1_upper = wilson_interval(e.type1, e.trials).upper;
    s.type2_upper = wilson_interval(e.type2, e.trials).upper;
    s.passed = s.type1_upper <= target && s.type2_upper <= target;
    result.steps.push_back(s);
    return s.passed;
  };
  std::size_t lo = 0, hi = start;
  while (!test(hi)) {
    lo = hi;
    if (hi > cap / 2) {
      throw std::runtime_error("calibrate: no budget up to " + std::to_string(cap) +
                               " reached the target error");
    }
    hi *= 2;
  }
  while (hi - lo > 1 && static_cast<double>(hi - lo) > rel_tol * static_cast<double>(hi)) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (test(mid) ? hi : lo) = mid;
  }
  result.n_star = hi;
  return result;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  require(std::find(kProtocols.begin(), kProtocols.end(), protocol) != kProtocols.end(),
          "protocol", "is not one of private-sim, simulate-infer, public, public-4wise, "
                      "param-identity");
  require(k >= 2, "k", "must be at least 2");
  require(ell >= 1 && ell <= 16, "ell", "must be in [1, 16]");
  require(eps > 0.0 && eps <= 1.0, "eps", "must be in (0, 1]");
  require(delta > 0.0 && delta < 1.0, "delta", "must be in (0, 1)");
  require(trials > 0, "trials", "must be positive");
  require(master_seed > 0, "master_seed", "must be positive");
  require(output_format == "csv" || output_format == "json", "output_format",
          "must be csv or json");
  require(!players || *players > 0, "players", "must be positive");
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "protocol") c.protocol = v.get<std::string>();
    else if (key == "k") c.k = v.get<std::size_t>();
    else if (key == "ell") c.ell = v.get<unsigned>();
    else if (key == "eps") c.eps = v.get<double>();
    else if (key == "delta") c.delta = v.get<double>();
    else if (key == "trials") c.trials = v.get<std::size_t>();
    else if (key == "master_seed") c.master_seed = v.get<std::uint64_t>();
    else if (key == "output_format") c.output_format = v.get<std::string>();
    else if (key == "players") c.players = v.get<std::size_t>();
    else if (key == "constants") c.constants = constants_from_json(v);
    else throw std::invalid_argument("config field '" + key + "' is not recognized");
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = {{"protocol", c.protocol},   {"k", c.k},
                      {"ell", c.ell},             {"eps", c.eps},
                      {"delta", c.delta},         {"trials", c.trials},
                      {"master_seed", c.master_seed},
                      {"output_format", c.output_format},
                      {"constants", dsim::to_json(c.constants)}};
  if (c.players) j["players"] = *c.players;
  return j;
}

Distribution reference_instance(const std::string& protocol, std::size_t k) {
  if (protocol != "param-identity") return Distribution::uniform(k);
  std::vector<double> w(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += w[i] = 1.0 / static_cast<double>(i + 1);
  for (double& x : w) x /= total;
  return Distribution(std::move(w));
}

Distribution far_instance(const Distribution& q, double eps) {
  const std::size_t k = q.size();
  auto make = [&](double c) {
    std::vector<double> w(k);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      total += w[i] = q[i] * (1.0 + (i % 2 == 0 ? c : -c));
    }
    for (double& x : w) x /= total;
    return Distribution(std::move(w));
  };
  if (tv_distance(make(1.0), q) < eps) {
    throw std::invalid_argument("far_instance: eps is out of reach for this reference");
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (tv_distance(make(mid), q) >= eps ? hi : lo) = mid;
  }
  return make(hi);
}

std::vector<ReportRow> run_config(const ExperimentConfig& config, unsigned workers) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ReportRow row;
  if (config.protocol == "private-sim") {
    row = private_sim_row(config, workers);
  } else {
    const auto e = estimate(config, config.players, workers);
    row.config = config;
    row.players_used = e.players;
    row.type1_rate = static_cast<double>(e.type1) / static_cast<double>(e.trials);
    row.type2_rate = static_cast<double>(e.type2) / static_cast<double>(e.trials);
    row.type1_upper = wilson_interval(e.type1, e.trials).upper;
    row.type2_upper = wilson_interval(e.type2, e.trials).upper;
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {row};
}

CalibrationResult calibrate_min_players(const ExperimentConfig& base, double target_delta,
                                        double rel_tol, std::size_t cap, unsigned workers) {
  base.validate();
  if (!(target_delta > 0.0 && target_delta < 1.0)) {
    throw std::invalid_argument("calibrate: target_delta must lie in (0, 1)");
  }
  std::size_t start = 0;
  if (base.protocol == "simulate-infer") {
    InferenceTask t;
    t.k = base.k;
    t.centralized_samples = 2;
    t.overshoot = InferenceTask::hoeffding_overshoot(2, base.delta);
    start = simulation_players(t, base.ell);
  } else if (base.protocol == "public" || base.protocol == "public-4wise") {
    start = 8 * plan_public_test(base.k, base.ell, base.eps, base.delta,
                                 base.protocol == "public-4wise", base.constants)
                    .blocks;
  } else {
    throw std::invalid_argument("calibrate: protocol " + base.protocol +
                                " has no adjustable player budget");
  }
  return search_budget(start, target_delta, rel_tol, cap,
                       [&](std::size_t n) { return estimate(base, n, workers); });
}

CalibrationResult calibrate_learning(const ExperimentConfig& base, double target_delta,
                                     double rel_tol, std::size_t cap, unsigned workers) {
  base.validate();
  if (!(target_delta > 0.0 && target_delta < 1.0)) {
    throw std::invalid_argument("calibrate: target_delta must lie in (0, 1)");
  }
  InferenceTask t;
  t.k = base.k;
  t.centralized_samples = 1;
  t.overshoot = InferenceTask::hoeffding_overshoot(1, base.delta);
  const std::size_t start = simulation_players(t, base.ell);
  const Distribution p = Distribution::uniform(base.k);
  const RngStream root(base.master_seed, 0);
  return search_budget(start, target_delta, rel_tol, cap, [&](std::size_t n) {
    const std::size_t big_n = centralized_samples_for_budget(n, base.k, base.ell, base.delta);
    InferenceTask task;
    task.kind = TaskKind::learning;
    task.k = base.k;
    task.eps = base.eps;
    task.delta = base.delta;
    task.centralized_samples = big_n;
    task.overshoot = InferenceTask::hoeffding_overshoot(big_n, base.delta);
    auto fails = run_trials(
        base.trials,
        [&](std::size_t i) {
          const RngStream r = root.child(i);
          DistributionSource src(p, r.child(0));
          RngStream rng = r.child(1);
          const auto res = std::get<LearningResult>(simulate_and_infer(task, base.ell, src, rng));
          return tv_distance(res.estimate, p) > base.eps;
        },
        workers);
    ErrorRates e;
    e.trials = base.trials;
    for (bool f : fails) e.type1 += f ? 1 : 0;
    return e;
  });
}

SweepResult scaling_sweep(const std::vector<std::string>& protocols,
                          const std::vector<std::size_t>& ks, const ExperimentConfig& base,
                          double target_delta, unsigned workers) {
  std::vector<std::size_t> sorted = ks;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() < 3) {
    throw std::invalid_argument("scaling_sweep: needs at least three distinct values of k");
  }
  SweepResult out;
  for (const auto& proto : protocols) {
    std::vector<double> xs, ys;
    for (std::size_t k : ks) {
      ExperimentConfig c = base;
      c.protocol = proto;
      c.k = k;
      const auto r = calibrate_min_players(c, target_delta, 0.05, std::size_t{1} << 36, workers);
      out.points.push_back({proto, k, r.n_star});
      xs.push_back(static_cast<double>(k));
      ys.push_back(static_cast<double>(r.n_star));
    }
    out.slopes.emplace_back(proto, loglog_slope(xs, ys));
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows, bool timing) {
  out << "protocol,k,ell,eps,delta,trials,seed,players_used,type1_rate,type1_upper,"
         "type2_rate,type2_upper";
  if (timing) out << ",wall_time";
  out << '\n';
  for (const auto& r : rows) {
    const auto& c = r.config;
    out << c.protocol << ',' << c.k << ',' << c.ell << ',' << format_double(c.eps) << ','
        << format_double(c.delta) << ',' << c.trials << ',' << c.master_seed << ','
        << format_double(r.players_used) << ',' << format_double(r.type1_rate) << ','
        << format_double(r.type1_upper) << ',' << format_double(r.type2_rate) << ','
        << format_double(r.type2_upper);
    if (timing) out << ',' << format_double(r.wall_time);
    out << '\n';
  }
}

nlohmann::json rows_to_json(const std::vector<ReportRow>& rows, bool timing) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"config", to_json(r.config)},
                        {"players_used", r.players_used},
                        {"type1_rate", r.type1_rate},
                        {"type1_upper", r.type1_upper},
                        {"type2_rate", r.type2_rate},
                        {"type2_upper", r.type2_upper},
                        {"extra", r.extra}};
    if (timing) j["wall_time"] = r.wall_time;
    arr.push_back(std::move(j));
  }
  return arr;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "protocol,k,n_star\n";
  for (const auto& p : sweep.points) out << p.protocol << ',' << p.k << ',' << p.n_star << '\n';
  out << "protocol,slope\n";
  for (const auto& [proto, s] : sweep.slopes) out << proto << ',' << format_double(s) << '\n';
}

nlohmann::json to_json(const CalibrationResult& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps) {
    steps.push_back({{"players", s.players},
                     {"type1_rate", s.type1_rate},
                     {"type1_upper", s.type1_upper},
                     {"type2_rate", s.type2_rate},
                     {"type2_upper", s.type2_upper},
                     {"passed", s.passed}});
  }
  return {{"n_star", r.n_star}, {"steps", steps}};
}

}  // namespace dsim::bench
