#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "teamteach/curriculum.hpp"
#include "teamteach/learner.hpp"

namespace teamteach {

enum class Strategy : int {
  Baseline = 0,
  IndividualLow = 1,
  IndividualHigh = 2,
  Common = 3,
  Joint = 4
};

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct TeamComposition {
  std::vector<learner::LearnerKind> members;

  std::string name() const;  // e.g. "NNP"
  static TeamComposition parse(const std::string& text);  // "NNP" or "N,N,P"
};

enum class SnapshotCadence : int { None = 0, Period = 1, Final = 2 };

struct Config {
  // domain
  double gamma = 0.95;
  int horizon = 25;
  Vec3 w_star{-3.0, 3.5, -1.0};  // normalized on use
  curriculum::EnvPoolParams pool;
  std::uint64_t pool_seed = 7;

  // beliefs
  std::size_t n_particles = 500;
  double kappa = 4.0;
  double eta = 0.02;
  double nu = 0.03;
  double teacher_mass = 0.76;
  std::size_t region_samples = 100000;
  std::size_t scoring_samples = 20000;
  SnapshotCadence snapshots = SnapshotCadence::None;

  // learners
  learner::LearnerProfile novice = learner::LearnerProfile::novice();
  learner::LearnerProfile proficient = learner::LearnerProfile::proficient();
  bool deterministic_increments = false;

  // curriculum
  std::size_t n_demos = 1;
  std::size_t n_tests = 1;
  std::size_t n_cf = 8;

  // study grid
  int replicates = 15;
  int period_cap = 30;
  std::uint64_t master_seed = 20240501;
  std::vector<Strategy> strategies = {Strategy::Baseline, Strategy::IndividualLow,
                                      Strategy::IndividualHigh, Strategy::Common,
                                      Strategy::Joint};
  std::vector<TeamComposition> compositions = {
      TeamComposition::parse("NNN"), TeamComposition::parse("NNP"),
      TeamComposition::parse("NPP"), TeamComposition::parse("PPP")};

  mdp::WeightVector ground_truth() const { return mdp::WeightVector(w_star); }
  const learner::LearnerProfile& profile(learner::LearnerKind k) const {
    return k == learner::LearnerKind::Novice ? novice : proficient;
  }

  std::string to_json() const;
  static Config from_json(const std::string& text);
  static Config load(const std::string& path);
};

}  // namespace teamteach
