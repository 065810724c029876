// Command-line front end: run the full teaching study, replay a single
// session with a trace, or run a quick self-check.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "teamteach/study.hpp"

namespace tt = teamteach;

namespace {

tt::Config load_config(const std::string& path) {
  if (path.empty()) return tt::Config{};
  return tt::Config::load(path);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::uint64_t seed, bool seed_set, int parallel,
                 const std::vector<std::string>& strategies,
                 const std::vector<std::string>& compositions) {
  tt::Config config = load_config(config_path);
  if (seed_set) config.master_seed = seed;
  if (!strategies.empty()) {
    config.strategies.clear();
    for (const auto& s : strategies)
      config.strategies.push_back(tt::strategy_from_string(s));
  }
  if (!compositions.empty()) {
    config.compositions.clear();
    for (const auto& c : compositions)
      config.compositions.push_back(tt::TeamComposition::parse(c));
  }

  const auto t0 = std::chrono::steady_clock::now();
  const auto records = tt::study::run_study(config, parallel);
  const auto t1 = std::chrono::steady_clock::now();
  tt::study::write_study_outputs(records, out_dir);

  std::map<std::string, std::pair<double, int>> by_strategy;
  int aborted = 0;
  for (const auto& r : records) {
    auto& [sum, count] = by_strategy[tt::to_string(r.strategy)];
    sum += r.n_interactions;
    count += 1;
    if (r.aborted) ++aborted;
  }
  std::cout << records.size() << " sessions in "
            << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()
            << " ms\n";
  for (const auto& [name, agg] : by_strategy)
    std::cout << "  " << name << ": mean interactions "
              << agg.first / std::max(1, agg.second) << "\n";
  if (aborted > 0) std::cout << "  aborted sessions: " << aborted << "\n";
  std::cout << "wrote " << out_dir << "/study.csv and " << out_dir
            << "/sessions/\n";
  return aborted == 0 ? 0 : 1;
}

int cmd_session(const std::string& config_path, const std::string& strategy,
                const std::string& composition, std::uint64_t seed,
                const std::string& trace_path) {
  tt::Config config = load_config(config_path);
  if (config.snapshots == tt::SnapshotCadence::None)
    config.snapshots = tt::SnapshotCadence::Period;
  const tt::curriculum::StudyAssets assets(
      config.pool, config.ground_truth(), config.gamma, config.horizon,
      config.pool_seed, tt::derive_seed(config.master_seed, 0x5a3d1e),
      config.region_samples, config.scoring_samples);
  const auto record = tt::study::run_session(
      tt::strategy_from_string(strategy), tt::TeamComposition::parse(composition),
      seed, config, assets);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << trace_path << "\n";
      return 1;
    }
    out << record.to_json();
  }
  std::cout << "session " << record.id() << ": interactions "
            << record.n_interactions << ", team knowledge "
            << record.team_knowledge
            << (record.converged ? "" : " (not converged)") << "\n";
  return 0;
}

// Quick deterministic self-checks; the full suites live in the test binaries.
int cmd_validate(const std::string& config_path) {
  tt::Config config = load_config(config_path);
  int failures = 0;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "\n";
    if (!ok) ++failures;
  };

  {  // likelihood normalization over the sphere
    bool ok = true;
    tt::RandomStream rng(7);
    for (double mass : {0.6, 0.75, 0.9}) {
      const tt::bec::HalfSpaceConstraint c{tt::random_unit_vector(rng),
                                           tt::bec::ConstraintSource::Demo};
      const tt::belief::LikelihoodParams lp{mass, config.kappa};
      double total = 0.0;
      const std::size_t n = 200000;
      for (std::size_t i = 0; i < n; ++i)
        total += tt::belief::constraint_likelihood(tt::random_unit_vector(rng), c, lp);
      total *= 4.0 * M_PI / static_cast<double>(n);
      ok = ok && std::abs(total - 1.0) < 0.02;
    }
    report("constraint likelihood integrates to 1", ok);
  }

  {  // planner vs finite-horizon dynamic program
    bool ok = true;
    tt::RandomStream rng(11);
    for (int trial = 0; trial < 5 && ok; ++trial) {
      tt::mdp::GridEnvironment env;
      env.width = 3 + static_cast<int>(rng.integer(2));
      env.height = 3;
      env.start = {0, 0};
      env.goal = {env.width - 1, env.height - 1};
      env.gamma = config.gamma;
      env.horizon = 12;
      for (int y = 0; y < env.height; ++y)
        for (int x = 0; x < env.width; ++x)
          if (rng.uniform() < 0.2) env.rubble.insert({x, y});
      const tt::mdp::WeightVector w = config.ground_truth();
      const auto pol = tt::mdp::solve_policy(env, w);
      const auto traj = tt::mdp::rollout(env, pol);

      // memoized enumeration over complete trajectories
      std::map<std::pair<int, int>, double> memo;
      auto best = [&](auto&& self, const tt::mdp::State& s, int left) -> double {
        if (tt::mdp::is_terminal(env, s) || left == 0) return 0.0;
        const auto key = std::make_pair(pol.state_index(s), left);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        double best_v = -1e18;
        for (auto a : tt::mdp::kActions) {
          const auto nx = tt::mdp::step(env, s, a);
          const double r =
              w.reward(tt::mdp::transition_features(env, s, nx)) +
              env.gamma * self(self, nx, left - 1);
          best_v = std::max(best_v, r);
        }
        memo[key] = best_v;
        return best_v;
      };
      const double oracle = best(best, tt::mdp::initial_state(env), env.horizon);
      ok = std::abs(w.reward(traj.features) - oracle) < 1e-9;
    }
    report("planner matches trajectory enumeration", ok);
  }

  {  // Table-style beta arithmetic in the deterministic configuration
    tt::learner::LearnerProfile novice = config.novice;
    novice.beta0_std = 0.0;
    const auto l = tt::learner::make_learner(novice, 32, 3);
    const bool init_ok = std::abs(l.beta - novice.beta0_mean) < 1e-12;
    const double confirmatory = l.beta + novice.delta_beta_correct_std;
    const double corrective = l.beta + novice.delta_beta_incorrect_std;
    report("beta arithmetic matches profile constants",
           init_ok && std::abs(confirmatory - 0.736) < 1e-9 &&
               std::abs(corrective - 0.759) < 1e-9);
  }

  {  // session determinism
    tt::Config small = config;
    small.n_particles = 200;
    small.region_samples = 20000;
    small.scoring_samples = 10000;
    small.pool.count = 16;
    const tt::curriculum::StudyAssets assets(
        small.pool, small.ground_truth(), small.gamma, small.horizon,
        small.pool_seed, tt::derive_seed(small.master_seed, 0x5a3d1e),
        small.region_samples, small.scoring_samples);
    const auto comp = tt::TeamComposition::parse("NNP");
    const auto a =
        tt::study::run_session(tt::Strategy::Joint, comp, 99, small, assets);
    const auto b =
        tt::study::run_session(tt::Strategy::Joint, comp, 99, small, assets);
    report("repeated session is byte-identical", a.to_json() == b.to_json());
  }

  std::cout << (failures == 0 ? "all checks passed\n"
                              : std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop group machine-teaching simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int parallel = 0;
  std::vector<std::string> strategies;
  std::vector<std::string> compositions;

  auto* sim = app.add_subcommand("simulate", "run the full study grid");
  sim->add_option("--config", config_path, "config JSON path");
  sim->add_option("--out", out_dir, "output directory");
  auto* seed_opt = sim->add_option("--seed", seed, "master seed override");
  sim->add_option("--parallel", parallel, "worker threads (0 = default)");
  sim->add_option("--strategies", strategies, "subset of strategies")
      ->delimiter(',');
  sim->add_option("--compositions", compositions, "subset of compositions")
      ->delimiter(',');

  std::string strategy = "joint";
  std::string composition = "NNP";
  std::uint64_t session_seed = 1;
  std::string trace_path;
  auto* ses = app.add_subcommand("session", "run one session with a trace");
  ses->add_option("--config", config_path, "config JSON path");
  ses->add_option("--strategy", strategy, "teaching strategy")->required();
  ses->add_option("--composition", composition, "e.g. N,N,P")->required();
  ses->add_option("--seed", session_seed, "session seed");
  ses->add_option("--trace", trace_path, "trace JSON output path");

  auto* val = app.add_subcommand("validate", "run deterministic self-checks");
  val->add_option("--config", config_path, "config JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, out_dir, seed, seed_opt->count() > 0,
                          parallel, strategies, compositions);
    if (ses->parsed())
      return cmd_session(config_path, strategy, composition, session_seed,
                         trace_path);
    if (val->parsed()) return cmd_validate(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
