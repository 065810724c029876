// Acceptance suite: runs every release criterion against the default
// configuration and prints one PASS/FAIL line per criterion. Exit status is
// the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "teamteach/study.hpp"

namespace tt = teamteach;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  if (!ok) ++failures;
  std::fflush(stdout);
}

struct StudyStats {
  double baseline_mean = 0.0;
  double group_mean = 0.0;
  // [strategy][composition] means over replicates
  std::map<std::string, std::vector<double>> interactions;
  std::map<std::string, std::vector<double>> knowledge;
  std::vector<double> joint_areas;
  std::vector<double> high_areas;
};

StudyStats summarize(const tt::Config& config,
                     const std::vector<tt::study::SessionRecord>& records) {
  StudyStats s;
  int n_base = 0, n_group = 0;
  std::map<std::string, std::map<std::string, std::pair<double, int>>> cells_n;
  std::map<std::string, std::map<std::string, std::pair<double, int>>> cells_k;
  for (const auto& r : records) {
    const std::string strat = tt::to_string(r.strategy);
    if (r.strategy == tt::Strategy::Baseline) {
      s.baseline_mean += r.n_interactions;
      ++n_base;
    } else {
      s.group_mean += r.n_interactions;
      ++n_group;
      auto& [sn, cn] = cells_n[strat][r.composition];
      sn += r.n_interactions;
      cn += 1;
      auto& [sk, ck] = cells_k[strat][r.composition];
      sk += r.team_knowledge;
      ck += 1;
    }
    if (r.strategy == tt::Strategy::Joint)
      for (const auto& p : r.periods) s.joint_areas.push_back(p.demo_area);
    if (r.strategy == tt::Strategy::IndividualHigh)
      for (const auto& p : r.periods) s.high_areas.push_back(p.demo_area);
  }
  s.baseline_mean /= std::max(1, n_base);
  s.group_mean /= std::max(1, n_group);
  for (const auto& comp : config.compositions) {
    for (const auto& [strat, cells] : cells_n) {
      const auto& [sum, count] = cells.at(comp.name());
      s.interactions[strat].push_back(sum / count);
    }
    for (const auto& [strat, cells] : cells_k) {
      const auto& [sum, count] = cells.at(comp.name());
      s.knowledge[strat].push_back(sum / count);
    }
  }
  return s;
}

// adjacent-pair ordering with at most one tolerated violation per metric
struct OrderingCheck {
  int violations = 0;
  double worst = 0.0;
};

OrderingCheck check_ordering(const std::map<std::string, std::vector<double>>& rows,
                             bool increasing) {
  OrderingCheck out;
  for (const auto& [strat, vals] : rows) {
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      const double delta = increasing ? vals[i] - vals[i + 1] : vals[i + 1] - vals[i];
      if (delta > 1e-12) {
        ++out.violations;
        out.worst = std::max(out.worst, delta);
      }
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

int main() {
  const tt::Config config;  // the committed default configuration
  std::printf("running the default %d-session study...\n",
              static_cast<int>(config.strategies.size() * config.compositions.size() *
                               config.replicates));
  std::fflush(stdout);
  const auto t0 = std::chrono::steady_clock::now();
  const auto records = tt::study::run_study(config);
  const double study_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
  const StudyStats stats = summarize(config, records);

  {  // 1. baseline-vs-group interaction counts
    const double ratio = stats.baseline_mean / stats.group_mean;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "baseline %.2f / group %.2f = ratio %.2f (need >= 1.5, group in "
                  "[4,14]); study %.0f ms",
                  stats.baseline_mean, stats.group_mean, ratio, study_ms);
    report(1, "baseline takes at least 1.5x the group interactions",
           ratio >= 1.5 && stats.group_mean >= 4.0 && stats.group_mean <= 14.0,
           detail);
  }

  {  // 2. composition ordering within each group strategy
    const OrderingCheck ni = check_ordering(stats.interactions, /*increasing=*/false);
    const OrderingCheck kk = check_ordering(stats.knowledge, /*increasing=*/true);
    const bool ok = ni.violations <= 1 && ni.worst <= 0.5 && kk.violations <= 1 &&
                    kk.worst <= 0.02;
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "N_i violations %d (worst %.3f, allowed one <= 0.5); knowledge "
                  "violations %d (worst %.4f, allowed one <= 0.02)",
                  ni.violations, ni.worst, kk.violations, kk.worst);
    report(2, "more proficient teams learn faster and know more", ok, detail);
  }

  {  // 3. manipulation check: joint demos carve smaller regions than
     //    individual-high demos
    const double gap = mean_of(stats.high_areas) - mean_of(stats.joint_areas);
    tt::RandomStream rng(1234);
    int positive = 0;
    const int resamples = 2000;
    for (int b = 0; b < resamples; ++b) {
      auto draw = [&](const std::vector<double>& v) {
        double s = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
          s += v[rng.integer(v.size())];
        return s / static_cast<double>(v.size());
      };
      if (draw(stats.high_areas) - draw(stats.joint_areas) > 0.0) ++positive;
    }
    const double confidence = static_cast<double>(positive) / resamples;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "mean area joint %.4f vs individual_high %.4f, gap %+.4f, "
                  "bootstrap confidence %.3f (need >= 0.95)",
                  mean_of(stats.joint_areas), mean_of(stats.high_areas), gap,
                  confidence);
    report(3, "joint-belief demos are the most informative", gap > 0.0 && confidence >= 0.95,
           detail);
  }

  {  // 4. knowledge metric vs independent recomputation from snapshots
    bool ok = true;
    tt::RandomStream rng(77);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      tt::belief::Belief b = tt::belief::init_uniform_with_prior(
          200 + rng.integer(400), tt::derive_seed(500, i));
      // random weights, then a few updates to make the snapshot non-trivial
      tt::bec::ConstraintSet cs;
      for (int k = 0; k < 1 + static_cast<int>(rng.integer(4)); ++k)
        cs.add({tt::random_unit_vector(rng), tt::bec::ConstraintSource::Demo});
      tt::belief::update(b, cs, tt::belief::LikelihoodParams{0.76, 4.0});
      const double direct = tt::belief::p_bec(b, cs);
      const double oracle =
          oracles::p_bec_from_json(tt::belief::belief_to_json(b), cs);
      worst = std::max(worst, std::abs(direct - oracle));
      ok = ok && std::abs(direct - oracle) <= 1e-12;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "100 snapshots, worst |delta| = %.2e",
                  worst);
    report(4, "p_bec equals independent snapshot recomputation", ok, detail);
  }

  {  // 5. likelihood normalization
    bool ok = true;
    double worst = 1.0;
    tt::RandomStream rng(909);
    for (int c = 0; c < 20; ++c) {
      const tt::bec::HalfSpaceConstraint constraint{
          tt::random_unit_vector(rng) * (0.5 + rng.uniform()),
          tt::bec::ConstraintSource::Demo};
      for (double mass : {0.6, 0.75, 0.9}) {
        const double integral = oracles::likelihood_integral(
            constraint, tt::belief::LikelihoodParams{mass, 4.0}, 1000000, rng);
        if (std::abs(integral - 1.0) > std::abs(worst - 1.0)) worst = integral;
        ok = ok && integral >= 0.98 && integral <= 1.02;
      }
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail),
                  "20 constraints x {0.6,0.75,0.9}, worst integral %.4f", worst);
    report(5, "constraint likelihood integrates to one", ok, detail);
  }

  {  // 6. Bayesian consistency suite
    int bad_increase = 0, bad_monotone = 0, bad_equiv = 0;
    for (int i = 0; i < 200; ++i) {
      tt::RandomStream rng(tt::derive_seed(600, i));
      const tt::Vec3 n = tt::random_unit_vector(rng);
      tt::bec::ConstraintSet cs;
      cs.add({n, tt::bec::ConstraintSource::Demo});

      tt::belief::Belief b =
          tt::belief::init_uniform_with_prior(500, tt::derive_seed(601, i));
      const double before = tt::belief::p_bec(b, cs);
      const double after = tt::belief::p_bec(
          tt::belief::simulate_update(b, cs, tt::belief::LikelihoodParams{0.8, 4.0}),
          cs);
      if (!(after > before || before >= 1.0)) ++bad_increase;

      const double lo = tt::belief::p_bec(
          tt::belief::simulate_update(b, cs, tt::belief::LikelihoodParams{0.6, 4.0}),
          cs);
      const double hi = tt::belief::p_bec(
          tt::belief::simulate_update(b, cs, tt::belief::LikelihoodParams{0.9, 4.0}),
          cs);
      if (!(hi > lo)) ++bad_monotone;

      // joint with a single member must equal the plain update exactly
      tt::team::TeamEvidence ev;
      ev.per_member = {cs};
      tt::belief::Belief plain =
          tt::belief::init_uniform_with_prior(300, tt::derive_seed(602, i));
      tt::belief::Belief joint = plain;
      tt::belief::update(plain, cs, tt::belief::LikelihoodParams{0.76, 4.0});
      tt::team::joint_update(joint, ev, tt::belief::LikelihoodParams{0.76, 4.0});
      if (tt::belief::belief_to_json(plain) != tt::belief::belief_to_json(joint))
        ++bad_equiv;
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "failures over 200 cases: increase %d, monotone %d, m=1 "
                  "equivalence %d",
                  bad_increase, bad_monotone, bad_equiv);
    report(6, "Bayesian consistency suite",
           bad_increase == 0 && bad_monotone == 0 && bad_equiv == 0, detail);
  }

  {  // 7. planner vs exhaustive trajectory enumeration
    bool ok = true;
    double worst = 0.0;
    tt::RandomStream rng(700);
    for (int i = 0; i < 25; ++i) {
      tt::mdp::GridEnvironment env;
      env.width = 2 + static_cast<int>(rng.integer(3));
      env.height = 2 + static_cast<int>(rng.integer(3));
      env.start = {0, 0};
      env.goal = {env.width - 1, env.height - 1};
      env.gamma = config.gamma;
      env.horizon = config.horizon;
      for (int x = 0; x < env.width; ++x)
        for (int y = 0; y < env.height; ++y)
          if (rng.uniform() < 0.25) env.rubble.insert({x, y});
      if (rng.uniform() < 0.5)
        env.charger = tt::mdp::Cell{static_cast<int>(rng.integer(env.width)),
                                    static_cast<int>(rng.integer(env.height))};
      // step-averse weights per the domain prior
      const tt::mdp::WeightVector w(
          tt::Vec3{-rng.uniform(), rng.uniform(), -0.2 - rng.uniform()});
      const auto pol = tt::mdp::solve_policy(env, w);
      const double mine = w.reward(tt::mdp::rollout(env, pol).features);
      const double oracle = oracles::best_reward_enumeration(env, w);
      worst = std::max(worst, std::abs(mine - oracle));
      ok = ok && std::abs(mine - oracle) <= 1e-9;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "25 environments, worst |delta| = %.2e",
                  worst);
    report(7, "planner matches trajectory enumeration", ok, detail);
  }

  {  // 8. beta dynamics
    const tt::curriculum::StudyAssets assets(
        config.pool, config.ground_truth(), config.gamma, config.horizon,
        config.pool_seed, tt::derive_seed(config.master_seed, 0x5a3d1e),
        config.region_samples, config.scoring_samples);
    int corrective_trials = 0, improved = 0;
    tt::curriculum::PolicyCache cache;
    const tt::belief::LikelihoodParams teacher_lp{config.teacher_mass, config.kappa};
    for (std::uint64_t seed = 0; corrective_trials < 200 && seed < 2000; ++seed) {
      // one period replayed by hand: demos, a test, then feedback
      auto l = tt::learner::make_learner(config.novice, config.n_particles,
                                         tt::derive_seed(800, seed));
      tt::belief::Belief teacher = tt::belief::init_uniform_with_prior(
          config.n_particles, tt::derive_seed(801, seed));
      tt::RandomStream rng(tt::derive_seed(802, seed));
      const int kc = static_cast<int>(seed % assets.kcs.size());
      const auto plan = tt::curriculum::select_demos(
          assets, cache, assets.kcs[kc], teacher, teacher_lp, config.n_demos,
          config.n_cf, rng);
      tt::learner::observe_demos(l, plan.conveyed);
      const std::set<int> exclude(plan.env_indices.begin(), plan.env_indices.end());
      const auto tests = tt::curriculum::select_tests(assets, kc, exclude, {}, 1);
      const auto response = tt::learner::respond_to_test(l, tests[0]);
      if (response.correct) continue;
      ++corrective_trials;
      const double before =
          tt::belief::p_bec(l.self_belief, tests[0].discriminating);
      tt::learner::receive_feedback(l, tests[0], response,
                                    tt::learner::FeedbackKind::Corrective);
      if (tt::belief::p_bec(l.self_belief, tests[0].discriminating) > before)
        ++improved;
    }

    tt::learner::LearnerProfile zero_var = config.novice;
    zero_var.beta0_std = 0.0;
    auto l = tt::learner::make_learner(zero_var, 32, 1);
    const bool arithmetic =
        std::abs(l.beta + zero_var.delta_beta_correct_std - 0.736) <= 1e-12 &&
        std::abs(l.beta + zero_var.delta_beta_incorrect_std - 0.759) <= 1e-12;

    const double rate =
        corrective_trials > 0
            ? static_cast<double>(improved) / corrective_trials
            : 0.0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "corrective feedback improved p_bec in %d/%d trials (%.3f, need "
                  ">= 0.95); point arithmetic %s",
                  improved, corrective_trials, rate, arithmetic ? "exact" : "WRONG");
    report(8, "feedback dynamics", corrective_trials >= 200 && rate >= 0.95 && arithmetic,
           detail);
  }

  {  // 9. determinism of the full study
    const auto rerun = tt::study::run_study(config);
    const bool ok = tt::study::study_csv(records) == tt::study::study_csv(rerun);
    report(9, "repeated study is byte-identical", ok,
           ok ? "study.csv bytes match" : "study.csv bytes differ");
  }

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures;
}
