// Command-line front end for the simulation and testing library.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsim/bench.hpp"
#include "dsim/constants.hpp"
#include "dsim/param_identity.hpp"
#include "dsim/partition_moments.hpp"
#include "dsim/sample_source.hpp"
#include "dsim/simulate_infer.hpp"
#include "dsim/stats.hpp"

using namespace dsim;

namespace {

struct Common {
  std::size_t k = 16;
  unsigned ell = 1;
  double eps = 0.3;
  double delta = 0.1;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::string constants_file;
  std::string format = "csv";
  std::string out;
  bool timing = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--k", c.k, "alphabet size")->capture_default_str();
  app->add_option("--ell", c.ell, "bits per player")->capture_default_str();
  app->add_option("--eps", c.eps, "distance parameter")->capture_default_str();
  app->add_option("--delta", c.delta, "failure probability")->capture_default_str();
  app->add_option("--trials", c.trials, "Monte Carlo trials")->capture_default_str();
  app->add_option("--seed", c.seed, "master seed")->capture_default_str();
  app->add_option("--constants", c.constants_file, "constants JSON file");
  app->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app->add_option("--out", c.out, "output path (default stdout)");
  app->add_flag("--timing", c.timing, "include wall_time in reports");
}

Constants constants_of(const Common& c) {
  if (!c.constants_file.empty()) return load_constants(c.constants_file);
#ifdef DSIM_DEFAULT_CONSTANTS
  std::ifstream probe(DSIM_DEFAULT_CONSTANTS);
  if (probe) return load_constants(DSIM_DEFAULT_CONSTANTS);
#endif
  return Constants{};
}

bench::ExperimentConfig config_of(const Common& c, const std::string& protocol) {
  bench::ExperimentConfig cfg;
  cfg.protocol = protocol;
  cfg.k = c.k;
  cfg.ell = c.ell;
  cfg.eps = c.eps;
  cfg.delta = c.delta;
  cfg.trials = c.trials;
  cfg.master_seed = c.seed;
  cfg.constants = constants_of(c);
  cfg.output_format = c.format;
  return cfg;
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void emit_rows(const Common& c, const std::vector<bench::ReportRow>& rows) {
  Output out(c.out);
  if (c.format == "json") {
    out.stream() << bench::rows_to_json(rows, c.timing).dump(2) << '\n';
  } else {
    bench::write_csv(out.stream(), rows, c.timing);
  }
}

int run_learn(const Common& c) {
  const Distribution p = bench::far_instance(Distribution::uniform(c.k), c.eps / 2.0);
  InferenceTask task;
  task.kind = TaskKind::learning;
  task.k = c.k;
  task.eps = c.eps;
  task.delta = c.delta;
  const Constants k = constants_of(c);
  const std::size_t players = required_players(task, c.ell, {k.c_L, k.c_T});
  task.centralized_samples = centralized_samples_for_budget(players, c.k, c.ell, c.delta);
  if (task.centralized_samples == 0) throw std::runtime_error("budget below one sample");
  task.overshoot = InferenceTask::hoeffding_overshoot(task.centralized_samples, c.delta);
  const RngStream root(c.seed, 0);
  auto tvs = run_trials(c.trials, [&](std::size_t i) {
    const RngStream r = root.child(i);
    DistributionSource src(p, r.child(0));
    RngStream rng = r.child(1);
    auto res = std::get<LearningResult>(simulate_and_infer(task, c.ell, src, rng));
    return tv_distance(res.estimate, p);
  });
  std::size_t failures = 0;
  RunningStats tv;
  for (double d : tvs) {
    tv.add(d);
    if (d > c.eps) ++failures;
  }
  const nlohmann::json j = {
      {"k", c.k}, {"ell", c.ell}, {"eps", c.eps}, {"delta", c.delta},
      {"players", simulation_players(task, c.ell)},
      {"centralized_samples", task.centralized_samples},
      {"trials", c.trials}, {"failure_rate", static_cast<double>(failures) / c.trials},
      {"failure_upper", wilson_interval(failures, c.trials).upper},
      {"mean_tv", tv.mean()}};
  Output out(c.out);
  if (c.format == "json") {
    out.stream() << j.dump(2) << '\n';
  } else {
    out.stream() << "k,ell,eps,delta,players,centralized_samples,trials,failure_rate,"
                    "failure_upper,mean_tv\n"
                 << c.k << ',' << c.ell << ',' << c.eps << ',' << c.delta << ','
                 << j["players"] << ',' << task.centralized_samples << ',' << c.trials
                 << ',' << j["failure_rate"] << ',' << j["failure_upper"] << ','
                 << tv.mean() << '\n';
  }
  return 0;
}

int run_moments(const Common& c, const std::string& sampler) {
  const std::size_t parts = std::size_t{1} << c.ell;
  const Distribution q = Distribution::uniform(c.k);
  const auto delta = PerturbationVector::difference(bench::far_instance(q, c.eps), q);
  RngStream rng(c.seed, 0);
  const auto rep =
      moment_lab(delta, parts,
                 sampler == "fourwise" ? PartitionSampler::fourwise : PartitionSampler::balanced,
                 c.trials, rng);
  Output out(c.out);
  out.stream() << to_json(rep).dump(2) << '\n';
  return 0;
}

int run_phi(const Common& c, const std::string& dist) {
  const Distribution q = bench::reference_instance(
      dist == "zipf" ? "param-identity" : "public", c.k);
  Output out(c.out);
  auto& os = out.stream();
  os << "t,kappa\n";
  const double tmax = 1.5 * std::sqrt(static_cast<double>(c.k));
  for (int i = 0; i <= 30; ++i) {
    const double t = tmax * i / 30.0;
    os << t << ',' << kappa(q.probs(), t) << '\n';
  }
  os << "gamma,phi,effective_support\n";
  for (double g : {0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9}) {
    os << g << ',' << phi(q, g) << ',' << effective_support(q, g).indices.size() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed simulation and identity testing under communication limits"};
  app.require_subcommand(1);

  Common sim_opts, learn_opts, test_opts, mom_opts, phi_opts, cal_opts, sweep_opts;

  auto* sim = app.add_subcommand("simulate", "boosted l-bit distributed simulation");
  add_common(sim, sim_opts);

  auto* learn = app.add_subcommand("learn", "simulate-and-infer learning in total variation");
  add_common(learn, learn_opts);

  std::string mode = "public";
  std::size_t players = 0;
  auto* test = app.add_subcommand("test-identity", "identity testing error rates");
  add_common(test, test_opts);
  test->add_option("--mode", mode, "public, public-4wise, private or param")
      ->check(CLI::IsMember({"public", "public-4wise", "private", "param"}))
      ->capture_default_str();
  test->add_option("--players", players, "override the player budget");

  std::string sampler = "balanced";
  auto* mom = app.add_subcommand("moments", "moments of the flattened perturbation (L = 2^ell)");
  add_common(mom, mom_opts);
  mom->add_option("--sampler", sampler, "balanced or fourwise")
      ->check(CLI::IsMember({"balanced", "fourwise"}));

  std::string dist = "uniform";
  auto* ph = app.add_subcommand("phi", "kappa and Phi tables as CSV");
  add_common(ph, phi_opts);
  ph->add_option("--dist", dist, "uniform or zipf")->check(CLI::IsMember({"uniform", "zipf"}));

  std::string cal_protocol = "public";
  double target = 0.1;
  std::string write_constants;
  auto* cal = app.add_subcommand("calibrate", "smallest player budget meeting a target error");
  add_common(cal, cal_opts);
  cal->add_option("--protocol", cal_protocol, "learn, simulate-infer, public or public-4wise");
  cal->add_option("--target", target, "target error (Wilson upper bound)")->capture_default_str();
  cal->add_option("--write-constants", write_constants,
                  "rescale C_blk, c_T or c_L to n_star and save");

  std::vector<std::string> protocols = {"public", "simulate-infer"};
  std::vector<std::size_t> ks = {16, 32, 64};
  double sweep_target = 0.1;
  auto* sweep = app.add_subcommand("sweep", "n_star across k with log-log slopes");
  add_common(sweep, sweep_opts);
  sweep->add_option("--protocol", protocols, "protocols to sweep");
  sweep->add_option("--ks", ks, "alphabet sizes");
  sweep->add_option("--target", sweep_target, "target error")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      emit_rows(sim_opts, bench::run_config(config_of(sim_opts, "private-sim")));
    } else if (*learn) {
      return run_learn(learn_opts);
    } else if (*test) {
      const std::string proto = mode == "private" ? "simulate-infer"
                                : mode == "param" ? "param-identity"
                                                  : mode;
      auto cfg = config_of(test_opts, proto);
      if (players > 0) cfg.players = players;
      emit_rows(test_opts, bench::run_config(cfg));
    } else if (*mom) {
      return run_moments(mom_opts, sampler);
    } else if (*ph) {
      return run_phi(phi_opts, dist);
    } else if (*cal) {
      const bool learning = cal_protocol == "learn";
      const auto cfg = config_of(cal_opts, learning ? "simulate-infer" : cal_protocol);
      const auto r = learning ? bench::calibrate_learning(cfg, target)
                              : bench::calibrate_min_players(cfg, target);
      Output out(cal_opts.out);
      out.stream() << bench::to_json(r).dump(2) << '\n';
      if (!write_constants.empty()) {
        Constants k = cfg.constants;
        k.seed = cal_opts.seed;
        if (learning || cal_protocol == "simulate-infer") {
          InferenceTask t;
          t.kind = learning ? TaskKind::learning : TaskKind::identity;
          t.k = cfg.k;
          t.eps = cfg.eps;
          t.delta = cfg.delta;
          const double unit = static_cast<double>(required_players(t, cfg.ell, {1.0, 1.0}));
          (learning ? k.c_L : k.c_T) = static_cast<double>(r.n_star) / unit;
        } else {
          const auto plan = plan_public_test(cfg.k, cfg.ell, cfg.eps, cfg.delta,
                                             cal_protocol == "public-4wise", k);
          const double m = static_cast<double>(r.n_star) / static_cast<double>(plan.blocks);
          k.C_blk = m * std::sqrt(static_cast<double>(plan.parts)) * cfg.eps * cfg.eps /
                    static_cast<double>(cfg.k);
          k.C_l2 = k.C_blk / (10.0 * std::log(1.0 / plan.delta_prime));
        }
        save_constants(k, write_constants);
      }
    } else if (*sweep) {
      const auto cfg = config_of(sweep_opts, protocols.front());
      const auto r = bench::scaling_sweep(protocols, ks, cfg, sweep_target);
      Output out(sweep_opts.out);
      bench::write_sweep_csv(out.stream(), r);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
